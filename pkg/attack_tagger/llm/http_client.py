from __future__ import annotations

from typing import Any, Dict, Optional

import httpx

from attack_tagger import config
from attack_tagger.errors import TransportError
from attack_tagger.llm.prompt import PromptRequest


class HttpChatClient:
    """
    Generic HTTP-JSON chat-completion client. Sends an OpenAI-compatible body
    {"model", "temperature", "messages"} to `endpoint` and reads choices[0].message.content.
    """

    def __init__(
        self,
        *,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout_s: Optional[float] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        self.endpoint = endpoint or config.llm_endpoint()
        self.api_key = config.llm_api_key() if api_key is None else api_key
        self.timeout_s = config.llm_timeout_s() if timeout_s is None else float(timeout_s)
        self._client = httpx.AsyncClient(timeout=self.timeout_s, transport=transport)

    async def close(self) -> None:
        await self._client.aclose()

    async def complete(self, request: PromptRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body: Dict[str, Any] = {
            "model": request.model_name,
            "temperature": request.temperature,
            "messages": request.messages(),
        }
        try:
            resp = await self._client.post(self.endpoint, headers=headers, json=body)
        except httpx.HTTPError as e:
            raise TransportError(f"{type(e).__name__}: {e}") from e
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:300]}")
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError(f"Unexpected chat-completion payload: {resp.text[:300]}") from e
        return str(content or "")
