// Denavit-Hartenberg forward kinematics mirroring the server's
// convention: each joint contributes Rz(theta+offset) Tz(d) Tx(a) Rx(alpha),
// with rows given as (a, d, alpha, theta_offset). Used to draw the arm
// linkage from the joint angles in a StateTick.

import type { RobotInfo, Vec3 } from './protocol';

export type Mat4 = number[][];

export function dhTransform(a: number, d: number, alpha: number, theta: number): Mat4 {
  const ct = Math.cos(theta);
  const st = Math.sin(theta);
  const ca = Math.cos(alpha);
  const sa = Math.sin(alpha);
  return [
    [ct, -st * ca, st * sa, a * ct],
    [st, ct * ca, -ct * sa, a * st],
    [0, sa, ca, d],
    [0, 0, 0, 1],
  ];
}

export function matMul(m: Mat4, n: Mat4): Mat4 {
  const out: Mat4 = [];
  for (let i = 0; i < 4; i++) {
    const row: number[] = [];
    for (let j = 0; j < 4; j++) {
      let s = 0;
      for (let k = 0; k < 4; k++) s += m[i][k] * n[k][j];
      row.push(s);
    }
    out.push(row);
  }
  return out;
}

function translation(pos: Vec3): Mat4 {
  return [
    [1, 0, 0, pos[0]],
    [0, 1, 0, pos[1]],
    [0, 0, 1, pos[2]],
    [0, 0, 0, 1],
  ];
}

/** World transforms after the base and after each joint (7 entries). */
export function forwardFrames(robot: RobotInfo, q: number[]): Mat4[] {
  let t = translation(robot.base_pos);
  const frames = [t];
  for (let i = 0; i < 6; i++) {
    const [a, d, alpha, offset] = robot.dh_parameters[i];
    t = matMul(t, dhTransform(a, d, alpha, q[i] + offset));
    frames.push(t);
  }
  return frames;
}

export function frameOrigin(m: Mat4): Vec3 {
  return [m[0][3], m[1][3], m[2][3]];
}

/** World-frame gaze direction for the final frame. */
export function gazeDirection(frames: Mat4[], gazeAxis: Vec3): Vec3 {
  const e = frames[frames.length - 1];
  return [
    e[0][0] * gazeAxis[0] + e[0][1] * gazeAxis[1] + e[0][2] * gazeAxis[2],
    e[1][0] * gazeAxis[0] + e[1][1] * gazeAxis[1] + e[1][2] * gazeAxis[2],
    e[2][0] * gazeAxis[0] + e[2][1] * gazeAxis[1] + e[2][2] * gazeAxis[2],
  ];
}
