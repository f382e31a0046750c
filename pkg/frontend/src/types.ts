// Shapes of the session API's JSON payloads. The server is the single source
// of truth; nothing here computes a verdict.

export type GateId = "C1" | "C2" | "C3" | "C4" | "C5" | "C5a" | "C5b" | "C6" | "C7" | "C8";

export type Classification = "escalate" | "alert" | "discard";

export interface FieldSpec {
  name: string;
  type: "enum" | "enum_list" | "bool" | "string_list" | "object" | "harm_list";
  required: boolean;
  choices?: string[];
  /** For object fields: sub-key -> choices array, or "string" / "bool". */
  shape?: Record<string, string[] | "string" | "bool">;
}

export interface QuestionView {
  gate: GateId;
  prompt: string;
  fields: FieldSpec[];
}

export interface GateOutcome {
  gate: GateId;
  result: string;
  diagnostics: string[];
  evidence: string[];
}

export interface TraceView {
  schema_version: number;
  subject: string;
  classification: Classification;
  rationale: string;
  outcomes: GateOutcome[];
}

export type AnswerPayload = Record<string, unknown>;

export interface SessionView {
  id: string;
  record_id: string;
  title: string;
  occurred_at: string;
  reported_at: string;
  created_at: string;
  status: "in_progress" | "complete";
  steps: GateId[];
  answered: GateId[];
  skipped: GateId[];
  current_gate: GateId | null;
  question: QuestionView | null;
  answers: Record<string, AnswerPayload>;
  outcomes: GateOutcome[];
  classification: Classification | null;
  rationale?: string;
  trace?: TraceView;
}

export interface RecordExport {
  complete: boolean;
  record: Record<string, unknown> & { id: string };
}

export interface CreateSessionBody {
  title: string;
  occurred_at: string;
  reported_at: string;
}
