from __future__ import annotations

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Environment-backed defaults. CLI flags override these; these override the built-ins below.
    Every key is read from ATTACK_TAGGER_<NAME> (or a .env file in the working directory).
    """

    model_config = SettingsConfigDict(
        env_prefix="ATTACK_TAGGER_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    llm_endpoint: str = "https://api.openai.com/v1/chat/completions"
    llm_api_key: str = ""
    llm_model: str = "gpt-4o"
    llm_temperature: float = 1.0
    llm_concurrency: int = 4
    llm_max_attempts: int = 3
    llm_backoff_s: float = 1.0
    llm_timeout_s: float = 60.0

    eta0: float = 0.1
    alpha: float = 1e-4
    epochs: int = 10
    seed: int = 0
    hash_bits: int = 18
    hash_seed: int = 0
    train_fraction: float = 0.8

    log_level: str = "INFO"


@lru_cache(maxsize=1)
def load_settings() -> Settings:
    return Settings()


def llm_endpoint() -> str:
    return str(load_settings().llm_endpoint)


def llm_api_key() -> str:
    return str(load_settings().llm_api_key or "")


def llm_model_name() -> str:
    return str(load_settings().llm_model or "gpt-4o")


def llm_temperature() -> float:
    return float(load_settings().llm_temperature)


def llm_concurrency() -> int:
    return max(1, int(load_settings().llm_concurrency))


def llm_max_attempts() -> int:
    return max(1, int(load_settings().llm_max_attempts))


def llm_backoff_s() -> float:
    return max(0.0, float(load_settings().llm_backoff_s))


def llm_timeout_s() -> float:
    return float(load_settings().llm_timeout_s)


def default_eta0() -> float:
    return float(load_settings().eta0)


def default_alpha() -> float:
    return float(load_settings().alpha)


def default_epochs() -> int:
    return int(load_settings().epochs)


def default_seed() -> int:
    return int(load_settings().seed)


def default_hash_bits() -> int:
    return int(load_settings().hash_bits)


def default_hash_seed() -> int:
    return int(load_settings().hash_seed)


def default_train_fraction() -> float:
    return float(load_settings().train_fraction)


def log_level() -> str:
    return str(load_settings().log_level or "INFO").upper()
