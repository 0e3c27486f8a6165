// Mirrors of the gateway's JSON shapes. The console derives all state from
// these; it holds no authority over reveal or classification.

export interface BaselineInfo {
  mean: number;
  sd: number;
  k: number;
  threshold?: number;
  n_samples?: number;
}

export interface Annotation {
  created_at: number;
  kind: "free_text" | "template";
  text: string;
  template_id?: string;
  responses?: Record<string, unknown>;
}

export interface EventView {
  id: number;
  captured_at: number;
  hr_bpm: number;
  rmssd_ms: number;
  baseline: BaselineInfo;
  status: "complete" | "failed";
  failure_reason?: string;
  reveal_at: number;
  revealed: boolean;
  pause_context: boolean;
  annotations: Annotation[];
  annotation_count: number;
  image_ref?: string;
  audio_ref?: string;
}

export interface ApiStatus {
  mode: string;
  baseline: BaselineInfo | null;
  current_rmssd: number | null;
  current_hr: number | null;
  sim_time: number;
  captures_total: number;
  failures_total: number;
}

export interface TemplateField {
  field_id: string;
  prompt: string;
  input: "text" | "scale_1_to_5" | "choice";
  options?: string[];
  required: boolean;
}

export interface Template {
  template_id: string;
  title: string;
  fields: TemplateField[];
}

export interface AnnotationSubmission {
  kind: "free_text" | "template";
  text?: string;
  template_id?: string;
  responses?: Record<string, unknown>;
}

export interface StreamEvent {
  id: number | null;
  event: string;
  data: Record<string, any>;
}
