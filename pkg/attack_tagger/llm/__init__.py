from .prompt import PROMPT_TEMPLATE, SENTENCE_SLOT, PromptRequest, build_prompt
from .normalize import UNMAPPABLE_TACTIC, LlmVerdict, normalize_response, strip_fences
from .provider import ChatClient
from .http_client import HttpChatClient
from .openai_provider import OpenAIChatClient
from .mock import MockChatClient
from .baseline import LlmOutcome, RetryPolicy, evaluate_llm, query_with_retry

__all__ = [
    "PROMPT_TEMPLATE",
    "SENTENCE_SLOT",
    "PromptRequest",
    "build_prompt",
    "UNMAPPABLE_TACTIC",
    "LlmVerdict",
    "normalize_response",
    "strip_fences",
    "ChatClient",
    "HttpChatClient",
    "OpenAIChatClient",
    "MockChatClient",
    "LlmOutcome",
    "RetryPolicy",
    "evaluate_llm",
    "query_with_retry",
]
