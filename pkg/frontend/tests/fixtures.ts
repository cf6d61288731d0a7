import type { RobotInfo, StateTick } from '../src/protocol';

export const ROBOT: RobotInfo = {
  dh_parameters: [
    [0.0, 0.1625, 1.5707963267948966, 0.0],
    [-0.425, 0.0, 0.0, 0.0],
    [-0.3922, 0.0, 0.0, 0.0],
    [0.0, 0.1333, 1.5707963267948966, 0.0],
    [0.0, 0.0997, -1.5707963267948966, 0.0],
    [0.0, 0.0996, 0.0, 0.0],
  ],
  joint_limits: [
    [-6.283185307179586, 6.283185307179586],
    [-6.283185307179586, 6.283185307179586],
    [-3.141592653589793, 3.141592653589793],
    [-6.283185307179586, 6.283185307179586],
    [-6.283185307179586, 6.283185307179586],
    [-6.283185307179586, 6.283185307179586],
  ],
  base_pos: [0, 0, 0],
  gaze_axis: [0, 0, 1],
};

export function stateTick(overrides: Partial<StateTick> = {}): StateTick {
  return {
    tick: 10,
    t: 0.333333,
    q: [0, -1.3, 1.1, -1.3, -1.57, 0],
    ee: { pos: [-0.5, -0.2, 0.55], rot: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] },
    gaze: { kind: 'primary', id: 2, pos: [1.5, 0.4, 1.1] },
    selection: 2,
    persons: [
      { id: 2, pos: [1.5, 0.4, 1.1], phi: 1.5, P: 0.5, V: 0, theta: 0.9, h_left: 0, h_right: 1 },
    ],
    drift: [],
    arousal: 5,
    attention: 'high',
    saturated: false,
    ...overrides,
  };
}

export function welcomeRaw(): string {
  return JSON.stringify({
    type: 'welcome',
    seq: 0,
    payload: { version: 1, dt: 1 / 30, robot: ROBOT },
  });
}

export function stateRaw(overrides: Partial<StateTick> = {}, seq = 1): string {
  return JSON.stringify({ type: 'state', seq, payload: stateTick(overrides) });
}
