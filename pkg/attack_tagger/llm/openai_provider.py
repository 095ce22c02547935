from __future__ import annotations

from typing import Optional

from attack_tagger import config
from attack_tagger.errors import TransportError
from attack_tagger.llm.prompt import PromptRequest


class OpenAIChatClient:
    """
    Chat client on the OpenAI SDK. Non-streaming; one user message per request.
    """

    def __init__(self, api_key: Optional[str] = None, base_url: Optional[str] = None):
        self.api_key = api_key or config.llm_api_key()
        if not self.api_key:
            raise TransportError("ATTACK_TAGGER_LLM_API_KEY is not set")

        # Import lazily so offline paths (tests, mock runs) don't require openai installed.
        from openai import AsyncOpenAI  # type: ignore

        self._client = AsyncOpenAI(api_key=self.api_key, base_url=base_url, timeout=config.llm_timeout_s())

    async def close(self) -> None:
        await self._client.close()

    async def complete(self, request: PromptRequest) -> str:
        from openai import OpenAIError  # type: ignore

        try:
            resp = await self._client.chat.completions.create(
                model=request.model_name,
                messages=request.messages(),
                temperature=request.temperature,
            )
        except OpenAIError as e:
            raise TransportError(f"{type(e).__name__}: {e}") from e
        if not getattr(resp, "choices", None):
            raise TransportError("Chat completion returned no choices")
        return str(resp.choices[0].message.content or "")
