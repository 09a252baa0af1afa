// Role coloring: red outside, yellow in the service area, green on the
// leader row, pink for the leader itself.
export const ROLE_COLORS = {
    outside: "#d9534f",
    sa: "#f0d24c",
    leader_row: "#59b85c",
    leader: "#ef7fb7",
};
export const ROLE_LABELS = {
    outside: "outside service area",
    sa: "service area",
    leader_row: "leader row",
    leader: "leader",
};
export function roleColor(role) {
    return ROLE_COLORS[role] ?? ROLE_COLORS.outside;
}
