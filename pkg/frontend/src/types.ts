// Wire types for the /v1 JSON API.

export type Phase = "Elicitation" | "Examination" | "DrugRecommendation" | "Closed";

export interface Health {
  status: string;
  locale: string;
  version: string;
  graph: Record<string, number>;
}

export interface SessionHandle {
  session_id: string;
  created_at: string;
  phase: Phase;
  turn: number;
}

export interface Attachment {
  drug: string;
  drug_name: string;
  image_uri: string;
  ref: string;
  url: string;
}

export interface WireUtterance {
  speaker: "Patient" | "System";
  text: string;
  turn: number;
  attachments: Attachment[];
  fallback: boolean;
}

export interface MessageReply {
  reply: WireUtterance;
  phase: Phase;
  candidates_count: number;
  asked_symptom?: string;
}

export interface SessionView extends SessionHandle {
  candidates_count: number;
  transcript: WireUtterance[];
}

export interface MedicalRecordDoc {
  session_id: string;
  department: string;
  chief_complaint: string;
  confirmed_symptoms: string[];
  denied_symptoms: string[];
  disease: string;
  examinations: string[];
  drugs: string[];
  narrative: string;
}
