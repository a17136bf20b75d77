// Payload shapes of the session service (mirrors the JSON it emits).

export interface TrajectoryPoint {
  t: number;
  s: number;
  e: number;
  v_x: number;
  safety_prob: number;
}

export interface PosteriorPoint {
  t: number;
  mean: number;
  var: number;
}

export interface Executables {
  e_max: number;
  mu_0: number;
  sigma_0: number;
  bar_sigma: number;
  assumptions: { style: string; road: string; speed_kmh: number; lane_quality: string };
  rationale: string;
}

export interface Digest {
  lateral_mean: number;
  lateral_std: number;
  speed_mean: number;
  speed_std: number;
  safety: number;
  prior_mean: number;
  prior_std: number;
  posterior_mean: number;
  posterior_std: number;
  executables_json: string;
}

export interface RunPayload {
  run_id: string;
  status: string;
  error?: string | null;
  rationale?: string;
  instruction?: string;
  executables?: Executables;
  metrics?: Record<string, number | boolean>;
  digest?: Digest;
  trajectory?: TrajectoryPoint[];
  posterior?: PosteriorPoint[];
  scenario_hash?: string;
  seed?: number;
  true_mu?: number;
  e_max?: number;
  road_segments?: [number, number][];
}

export interface SessionRunEntry {
  run_id: string;
  status: string;
  instruction: string;
  error?: string;
}

export interface SessionRecord {
  session_id: string;
  created_at: number;
  status: string;
  runs: SessionRunEntry[];
  session: { instructions?: string[]; rationales?: string[] };
  last_error?: string | null;
}
