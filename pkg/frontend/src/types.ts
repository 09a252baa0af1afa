// Shapes returned by the control API (v1).

export type Role = "outside" | "sa" | "leader_row" | "leader";

export interface GridCell {
  plane: number;
  slot: number;
  role: Role;
  chain_height: number;
  state_digest: string;
}

export interface GridResponse {
  seed: number;
  period: number;
  grid: { planes: number; slots_per_plane: number };
  leader: [number, number] | null;
  leader_row_plane: number;
  sa_size: number;
  nodes: GridCell[];
}

export interface TxResponse {
  seed: number;
  period: number;
  tx_id: string;
  status: string;
  reason?: string;
  height?: number;
  keys_written?: string[];
}

export interface StateResponse {
  seed: number;
  period: number;
  key: string;
  value: { balance?: number } & Record<string, unknown>;
  version: number;
  r: number;
}

export interface MetricsResponse {
  seed: number;
  period: number;
  totals: Record<string, number>;
  total_messages: number;
  proportions_percent: Record<string, number>;
  commits: number;
  migrations: number;
  periods_elapsed: number;
}
