"""Human interaction records, confirmation requests, and decision
rationales.

Operators affect a running mission through exactly four interaction
kinds: providing information, issuing commands, changing permissions,
and answering feedback requests. Agents reach back through confirmation
requests, and every autonomous decision leaves an immutable rationale
record that can be rendered for the operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .autonomy import PermissionChange
from .beliefs import Belief

INTERACTION_KINDS = frozenset(
    {"provided-information", "issued-command", "changed-permission", "feedback-response"}
)

DEFAULT_CONFIRMATION_EXPIRY = 120  # ticks


class MalformedInteraction(ValueError):
    pass


class NoSuchDecision(KeyError):
    pass


@dataclass(frozen=True)
class HumanInteraction:
    kind: str
    issuer: str
    # provided-information
    belief: Belief | None = None
    # issued-command
    target: str | None = None
    command: dict[str, Any] | None = None
    # changed-permission
    change: PermissionChange | None = None
    # feedback-response
    request_id: str | None = None
    verdict: str | None = None  # confirm | refute | amend
    amendments: dict[str, Any] | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.kind not in INTERACTION_KINDS:
            raise MalformedInteraction(f"unknown interaction kind {self.kind!r}")
        required = {
            "provided-information": self.belief,
            "issued-command": self.command,
            "changed-permission": self.change,
            "feedback-response": self.request_id,
        }[self.kind]
        if required is None:
            raise MalformedInteraction(f"{self.kind} interaction is missing its payload")
        if self.kind == "feedback-response" and self.verdict not in ("confirm", "refute", "amend"):
            raise MalformedInteraction(f"bad verdict {self.verdict!r}")
        if self.kind == "issued-command" and self.target is None:
            raise MalformedInteraction("issued-command requires a target agent")

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "issuer": self.issuer}
        if self.belief is not None:
            d["belief"] = self.belief.to_dict()
        if self.target is not None:
            d["target"] = self.target
        if self.command is not None:
            d["command"] = self.command
        if self.change is not None:
            d["change"] = self.change.to_dict()
        if self.request_id is not None:
            d["request_id"] = self.request_id
            d["verdict"] = self.verdict
            if self.amendments:
                d["amendments"] = self.amendments
            if self.note:
                d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "HumanInteraction":
        try:
            return cls(
                kind=d["kind"],
                issuer=d.get("issuer", "operator"),
                belief=Belief.from_dict(d["belief"]) if "belief" in d else None,
                target=d.get("target"),
                command=d.get("command"),
                change=PermissionChange.from_dict(d["change"]) if "change" in d else None,
                request_id=d.get("request_id"),
                verdict=d.get("verdict"),
                amendments=d.get("amendments"),
                note=d.get("note", ""),
            )
        except KeyError as exc:
            raise MalformedInteraction(f"missing field {exc}") from exc


@dataclass
class ConfirmationRequest:
    request_id: str
    agent_id: str
    subject: dict[str, Any]  # {"kind": "victim-sighting"|"duplicate-ambiguity"|"other", ...}
    opened_tick: int
    state: str = "open"  # open | answered | expired
    expires_tick: int = 0

    def subject_key(self) -> tuple[str, str, str]:
        """Identity for idempotent re-opens: one open request per
        (agent, subject kind, subject id)."""
        s = self.subject
        ident = str(s.get("victim") or s.get("group") or s.get("text") or "")
        return (self.agent_id, s.get("kind", "other"), ident)

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "agent_id": self.agent_id,
            "subject": self.subject,
            "opened_tick": self.opened_tick,
            "state": self.state,
            "expires_tick": self.expires_tick,
        }


class RequestRegistry:
    """Open confirmation requests with idempotent re-open semantics."""

    def __init__(self, expiry: int = DEFAULT_CONFIRMATION_EXPIRY) -> None:
        self.expiry = expiry
        self.requests: dict[str, ConfirmationRequest] = {}
        self._counter = 0

    def open(self, agent_id: str, subject: dict[str, Any], tick: int) -> tuple[ConfirmationRequest, bool]:
        """Returns (request, created). A duplicate open request is
        returned as-is instead of creating a second one."""
        probe = ConfirmationRequest("", agent_id, subject, tick)
        for req in self.requests.values():
            if req.state == "open" and req.subject_key() == probe.subject_key():
                return req, False
        self._counter += 1
        req = ConfirmationRequest(
            request_id=f"req-{self._counter}",
            agent_id=agent_id,
            subject=subject,
            opened_tick=tick,
            expires_tick=tick + self.expiry,
        )
        self.requests[req.request_id] = req
        return req, True

    def answer(self, request_id: str) -> ConfirmationRequest:
        req = self.requests.get(request_id)
        if req is None or req.state != "open":
            raise MalformedInteraction(f"response to non-open request {request_id!r}")
        req.state = "answered"
        return req

    def expired(self, tick: int) -> list[ConfirmationRequest]:
        out = []
        for req in sorted(self.requests.values(), key=lambda r: r.request_id):
            if req.state == "open" and tick >= req.expires_tick:
                req.state = "expired"
                out.append(req)
        return out

    def open_requests(self) -> list[ConfirmationRequest]:
        return [r for r in sorted(self.requests.values(), key=lambda r: r.request_id) if r.state == "open"]


class DecisionLog:
    """Immutable store of rationale records, keyed by decision id."""

    def __init__(self) -> None:
        self.records: dict[str, dict[str, Any]] = {}
        self._counter = 0

    def record(self, rec: dict[str, Any]) -> str:
        self._counter += 1
        decision_id = f"d-{self._counter}"
        rec = dict(rec)
        rec["decision_id"] = decision_id
        self.records[decision_id] = rec
        return decision_id

    def explain(self, decision_id: str) -> dict[str, Any]:
        rec = self.records.get(decision_id)
        if rec is None:
            raise NoSuchDecision(decision_id)
        return rec
