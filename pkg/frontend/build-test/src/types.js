// Shapes returned by the control API (v1).
export {};
