import type { SessionApi } from "./api.js";
import type { AnswerPayload, GateId, RecordExport, SessionView } from "./types.js";

/** A fully scripted walkthrough: facts keyed by the gate that asks for them. */
export interface SessionScript {
  title: string;
  occurred_at: string;
  reported_at: string;
  answers: Partial<Record<GateId, AnswerPayload>>;
}

export interface CompletedFlow {
  view: SessionView;
  record: RecordExport;
}

/**
 * Drive one session from creation to completion, always answering whatever
 * gate the server says is current. The server decides ordering, skipping,
 * and the verdict; the script only supplies facts.
 */
export async function runSessionFlow(api: SessionApi, script: SessionScript): Promise<CompletedFlow> {
  let view = await api.createSession({
    title: script.title,
    occurred_at: script.occurred_at,
    reported_at: script.reported_at,
  });
  while (view.status !== "complete") {
    const gate = view.current_gate;
    if (gate === null) {
      throw new Error(`session ${view.id} is in_progress with no current gate`);
    }
    const answer = script.answers[gate];
    if (answer === undefined) {
      throw new Error(`script "${script.title}" has no answer for ${gate}`);
    }
    view = await api.submitAnswer(view.id, gate, answer);
  }
  const record = await api.exportRecord(view.id);
  return { view, record };
}
