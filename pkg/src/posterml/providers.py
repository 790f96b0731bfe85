"""Uniform model-backend contract plus HTTP, replay, and mock adapters.

Every pipeline role (planner, composer, refiner, image editor, judge,
asset generator, embedder) talks through the same request/response
shape so any role can be served by a live endpoint, a replay directory,
or a deterministic mock.
"""
from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .errors import BackendError


@dataclass(frozen=True)
class TextPart:
    text: str

    def to_dict(self) -> dict:
        return {"type": "text", "text": self.text}


@dataclass(frozen=True)
class ImagePart:
    """Image content by file reference; adapters inline bytes as needed."""

    path: str

    def to_dict(self) -> dict:
        return {"type": "image", "path": self.path}


Part = TextPart | ImagePart


@dataclass(frozen=True)
class Message:
    role: str  # "system" | "user" | "assistant"
    parts: tuple[Part, ...]

    def to_dict(self) -> dict:
        return {"role": self.role, "parts": [p.to_dict() for p in self.parts]}


def text_message(role: str, text: str) -> Message:
    return Message(role=role, parts=(TextPart(text),))


@dataclass(frozen=True)
class ProviderRequest:
    messages: tuple[Message, ...]
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "messages": [m.to_dict() for m in self.messages],
            "params": dict(self.params),
        }

    def last_text(self) -> str:
        for message in reversed(self.messages):
            for part in reversed(message.parts):
                if isinstance(part, TextPart):
                    return part.text
        return ""

    def last_image(self) -> Optional[str]:
        for message in reversed(self.messages):
            for part in reversed(message.parts):
                if isinstance(part, ImagePart):
                    return part.path
        return None


@dataclass(frozen=True)
class ProviderResponse:
    text: str = ""
    images: tuple[str, ...] = ()  # file paths of any returned images

    def to_dict(self) -> dict:
        return {"text": self.text, "images": list(self.images)}


class Backend(Protocol):
    """A model endpoint: consumes a request, produces a response."""

    def complete(self, request: ProviderRequest) -> ProviderResponse: ...


def build_http_payload(request: ProviderRequest, model: str) -> dict:
    """Chat-completions style payload; images travel as base64 data URIs."""
    messages = []
    for message in request.messages:
        content = []
        for part in message.parts:
            if isinstance(part, TextPart):
                content.append({"type": "text", "text": part.text})
            else:
                data = Path(part.path).read_bytes()
                uri = "data:image/png;base64," + base64.b64encode(data).decode("ascii")
                content.append({"type": "image_url", "image_url": {"url": uri}})
        messages.append({"role": message.role, "content": content})
    payload = {"model": model, "messages": messages}
    payload.update(request.params)
    return payload


def parse_http_reply(reply: dict, image_dir: Optional[Path] = None) -> ProviderResponse:
    """Accept both chat-completions replies and the plain {text, images} form."""
    if "choices" in reply:
        try:
            text = reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed chat reply: {exc}") from exc
        return ProviderResponse(text=text if isinstance(text, str) else "")
    text = reply.get("text", "")
    images: list[str] = []
    for i, b64 in enumerate(reply.get("images", [])):
        if image_dir is None:
            raise BackendError("reply carries images but no image_dir is configured")
        image_dir.mkdir(parents=True, exist_ok=True)
        out = image_dir / f"reply-{i}.png"
        out.write_bytes(base64.b64decode(b64))
        images.append(str(out))
    return ProviderResponse(text=text, images=tuple(images))


class HttpBackend:
    """POSTs requests to a chat-completions compatible endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        auth_env: Optional[str] = None,
        timeout: float = 120.0,
        image_dir: Optional[str | Path] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.auth_env = auth_env
        self.timeout = timeout
        self.image_dir = Path(image_dir) if image_dir else None

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            token = os.environ.get(self.auth_env)
            if not token:
                raise BackendError(f"auth env var {self.auth_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        payload = build_http_payload(request, self.model)
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
        except Exception as exc:
            raise BackendError(f"http backend call failed: {exc}") from exc
        return parse_http_reply(body, self.image_dir)


class ReplayBackend:
    """Serves canned responses from a directory, in file-name order.

    Each response is a JSON file {"text": ..., "images": [path, ...]};
    image entries are paths relative to the directory.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise BackendError(f"replay directory {self.directory} does not exist")
        self._files = sorted(p for p in self.directory.iterdir() if p.suffix == ".json")
        self._cursor = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        if self._cursor >= len(self._files):
            raise BackendError(
                f"replay directory {self.directory} exhausted after {self._cursor} calls"
            )
        raw = json.loads(self._files[self._cursor].read_text())
        self._cursor += 1
        images = tuple(str(self.directory / img) for img in raw.get("images", []))
        return ProviderResponse(text=raw.get("text", ""), images=images)


class StaticBackend:
    """Always returns the same response; the simplest possible mock."""

    def __init__(self, text: str = "", images: Sequence[str] = ()):
        self.response = ProviderResponse(text=text, images=tuple(images))
        self.calls: list[ProviderRequest] = []

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls.append(request)
        return self.response


class IdentityBackend:
    """Echoes the request's last text part and last image reference back.

    Makes any reflection stage a fixed point, which is the canonical way
    to exercise loop plumbing without a model.
    """

    def __init__(self):
        self.calls: list[ProviderRequest] = []

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls.append(request)
        image = request.last_image()
        return ProviderResponse(
            text=request.last_text(),
            images=(image,) if image else (),
        )


class ScriptedBackend:
    """Returns queued responses in order; raises when the script runs dry."""

    def __init__(self, responses: Sequence[ProviderResponse | str]):
        self.responses = [
            r if isinstance(r, ProviderResponse) else ProviderResponse(text=r)
            for r in responses
        ]
        self.calls: list[ProviderRequest] = []

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls.append(request)
        if len(self.calls) > len(self.responses):
            raise BackendError("scripted backend has no responses left")
        return self.responses[len(self.calls) - 1]
