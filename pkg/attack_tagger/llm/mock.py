from __future__ import annotations

from typing import Callable, List

from attack_tagger.llm.prompt import PromptRequest

Responder = Callable[[PromptRequest], str]


class MockChatClient:
    """
    Deterministic offline client: replies with whatever `responder` returns for the request.
    A responder may raise TransportError to exercise retries.
    """

    def __init__(self, responder: Responder):
        self._responder = responder
        self.requests: List[PromptRequest] = []

    @classmethod
    def fixed(cls, reply: str) -> "MockChatClient":
        return cls(lambda _req: reply)

    async def complete(self, request: PromptRequest) -> str:
        self.requests.append(request)
        return self._responder(request)

    async def close(self) -> None:
        return None
