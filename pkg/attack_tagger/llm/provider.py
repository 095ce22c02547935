from __future__ import annotations

from typing import Protocol

from attack_tagger.llm.prompt import PromptRequest


class ChatClient(Protocol):
    """
    One request in, the assistant's text out. Transport problems raise TransportError.
    """

    async def complete(self, request: PromptRequest) -> str:
        ...

    async def close(self) -> None:
        ...
