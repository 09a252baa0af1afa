// Pure grid/view computations, kept DOM-free so they are unit-testable.

import { roleColor } from "./colors.js";
import type { GridCell, GridResponse, Role } from "./types.js";

export interface CellView {
  plane: number;
  slot: number;
  role: Role;
  color: string;
  chainHeight: number;
  isLeader: boolean;
  title: string;
}

export interface GridViewModel {
  period: number;
  seed: number;
  planes: number;
  slots: number;
  leader: [number, number] | null;
  cells: CellView[]; // row-major: plane 0 first, slots ascending
  saColumns: number[]; // window slot columns, west to east
  roleCounts: Record<Role, number>;
}

export function buildGridViewModel(grid: GridResponse): GridViewModel {
  const cells: CellView[] = [...grid.nodes]
    .sort((a, b) => a.plane - b.plane || a.slot - b.slot)
    .map((n) => ({
      plane: n.plane,
      slot: n.slot,
      role: n.role,
      color: roleColor(n.role),
      chainHeight: n.chain_height,
      isLeader: n.role === "leader",
      title:
        `(${n.plane},${n.slot}) ${n.role} height=${n.chain_height} ` +
        `digest=${n.state_digest.slice(0, 8)}`,
    }));
  const roleCounts: Record<Role, number> = {
    outside: 0,
    sa: 0,
    leader_row: 0,
    leader: 0,
  };
  for (const cell of cells) roleCounts[cell.role] += 1;
  return {
    period: grid.period,
    seed: grid.seed,
    planes: grid.grid.planes,
    slots: grid.grid.slots_per_plane,
    leader: grid.leader,
    cells,
    saColumns: windowColumns(grid.nodes, grid.grid.slots_per_plane),
    roleCounts,
  };
}

/** Window slot columns ordered west to east, handling the ring seam. */
export function windowColumns(nodes: GridCell[], slots: number): number[] {
  const inArea = new Set<number>();
  for (const n of nodes) if (n.role !== "outside") inArea.add(n.slot);
  const cols = [...inArea].sort((a, b) => a - b);
  if (cols.length === 0 || cols.length === slots) return cols;
  // rotate so the sequence is contiguous even when it wraps the seam
  for (let i = 0; i < cols.length; i++) {
    const prev = cols[(i - 1 + cols.length) % cols.length];
    if ((prev + 1) % slots !== cols[i]) {
      return [...cols.slice(i), ...cols.slice(0, i)];
    }
  }
  return cols;
}

/** True when the band is one contiguous run of columns on the ring. */
export function bandIsContiguous(columns: number[], slots: number): boolean {
  if (columns.length <= 1) return true;
  for (let i = 1; i < columns.length; i++) {
    if ((columns[i - 1] + 1) % slots !== columns[i]) return false;
  }
  return true;
}

/** True when `after` equals `before` shifted one column east (mod ring). */
export function bandShiftedEast(
  before: number[],
  after: number[],
  slots: number,
): boolean {
  if (before.length !== after.length || before.length === 0) return false;
  const shifted = new Set(before.map((s) => (s + 1) % slots));
  return after.every((s) => shifted.has(s));
}

/** Exactly one pink leader, sitting on the green leader row, inside the band. */
export function leaderPlacementOk(vm: GridViewModel, leaderRowPlane: number): boolean {
  if (vm.roleCounts.leader !== 1 || vm.leader === null) return false;
  const [plane, slot] = vm.leader;
  if (plane !== leaderRowPlane) return false;
  return vm.saColumns.includes(slot);
}

export function formatBalance(value: { balance?: number }): string {
  return typeof value.balance === "number" ? String(value.balance) : "n/a";
}
