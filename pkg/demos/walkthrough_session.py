#!/usr/bin/env python3
"""Drive the walkthrough session API end to end.

Starts the HTTP server on a spare port, answers the eight gate questions for
an escalating incident, then forks a what-if variant at the severity question
to show the classification flipping. Requires only the installed package.
"""

from __future__ import annotations

import socket
import subprocess
import sys
import time

import httpx

ANSWERS = {
    "C1": {"role": "causal_factor", "confidence": "confirmed", "evidence_available": True},
    "C2": {"scope_domain": "civilian"},
    "C3": {"immediate_flags": [], "telemetry_available": True},
    "C4": {"root_cause": {"kind": "technical", "key": "guardrail bypass"}},
    "C5": {"harm": [{"category": "privacy", "severity": 4, "basis": "realized"}]},
    "C6": {
        "jurisdictions": ["US", "GB", "DE"],
        "propagation": {
            "pathway": "api_access",
            "velocity": "hours",
            "containment_feasible_nationally": "no",
            "standing_condition": False,
        },
    },
    "C7": {
        "reversibility": {
            "containment": "restorable",
            "control_restoration": "restorable",
            "technical_state": "restorable",
            "societal_state": "unknown",
        }
    },
    "C8": {"near_miss": False},
}

WHAT_IF_C5 = {"harm": [{"category": "privacy", "severity": 2, "basis": "realized"}]}


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def wait_for(client: httpx.Client) -> None:
    for _ in range(100):
        try:
            if client.get("/health").status_code == 200:
                return
        except httpx.TransportError:
            time.sleep(0.1)
    raise RuntimeError("server did not come up")


def run_to_completion(client: httpx.Client, session: dict, answers: dict) -> dict:
    while session["current_gate"] is not None:
        gate = session["current_gate"]
        print(f"  {gate}: {session['question']['prompt']}")
        response = client.post(
            f"/sessions/{session['id']}/answers",
            json={"gate": gate, "answer": answers[gate]},
        )
        response.raise_for_status()
        session = response.json()
    return session


def main() -> int:
    port = free_port()
    server = subprocess.Popen(
        [sys.executable, "-m", "escalade", "serve", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        with httpx.Client(base_url=f"http://127.0.0.1:{port}", timeout=5.0) as client:
            wait_for(client)

            print("walking through an escalating incident:")
            created = client.post(
                "/sessions",
                json={
                    "title": "API data exposure",
                    "occurred_at": "2025-06-01T00:00:00Z",
                    "reported_at": "2025-06-02T00:00:00Z",
                },
            ).json()
            done = run_to_completion(client, created, ANSWERS)
            print(f"=> {done['classification']}: {done['rationale']}")
            skipped = ", ".join(done["skipped"]) or "none"
            print(f"   questions skipped: {skipped}")

            print("\nwhat if the severity had stayed low? forking at C5:")
            fork = client.post(
                f"/sessions/{created['id']}/fork",
                json={"up_to": "C5", "title": "severity stays low"},
            ).json()
            done = run_to_completion(client, fork, {**ANSWERS, "C5": WHAT_IF_C5})
            print(f"=> {done['classification']}: {done['rationale']}")
        return 0
    finally:
        server.terminate()
        server.wait(timeout=5)


if __name__ == "__main__":
    raise SystemExit(main())
