// Top-down (x-y) canvas renderer: arm linkage from joint angles via the
// shared DH convention, people with hand badges and score bars, the gaze
// ray, drift targets fading with remaining lifetime, and a stale banner.

import { forwardFrames, frameOrigin, gazeDirection } from './dh';
import type { SessionState } from './session';
import type { StateTick, Vec3 } from './protocol';

export interface View {
  width: number;
  height: number;
  scale: number; // pixels per metre
}

export interface Ctx2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
}

export function project(view: View, p: Vec3): [number, number] {
  // world x to the right, world y up; robot base at canvas centre
  return [view.width / 2 + p[0] * view.scale, view.height / 2 - p[1] * view.scale];
}

function circle(ctx: Ctx2D, x: number, y: number, r: number, fill: string): void {
  ctx.fillStyle = fill;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, Math.PI * 2);
  ctx.fill();
}

export function renderScene(ctx: Ctx2D, session: SessionState, view: View): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.globalAlpha = 1;
  const state = session.latest;
  if (state === null || session.robot === null) {
    ctx.fillStyle = '#888';
    ctx.font = '14px sans-serif';
    ctx.fillText('waiting for state…', 12, 24);
    return;
  }
  drawArm(ctx, session, state, view);
  drawGazeRay(ctx, session, state, view);
  for (const vt of state.drift) drawDrift(ctx, state, vt, view);
  for (const person of state.persons) drawPerson(ctx, session, state, person, view);
  drawSideInset(ctx, session, state, view);
  drawHud(ctx, state, view);
  const unanswered = session.pendingWarnings();
  if (unanswered.length > 0) {
    ctx.fillStyle = '#d59';
    ctx.font = '12px sans-serif';
    ctx.fillText(
      `no reply for: ${unanswered.map((p) => p.op).join(', ')}`,
      10,
      view.height - 28,
    );
  }
  if (session.isStale()) {
    ctx.fillStyle = 'rgba(180, 40, 40, 0.85)';
    ctx.fillRect(0, 0, view.width, 26);
    ctx.fillStyle = '#fff';
    ctx.font = '13px sans-serif';
    ctx.fillText('STALE: no recent state from server', 10, 18);
  }
}

/** Side elevation (x-z) in the bottom-right corner: makes the arousal
 * posture difference (hunched vs upright) legible. */
export function projectSide(view: View, p: Vec3): [number, number] {
  const w = view.width * 0.22;
  const h = view.height * 0.3;
  const x0 = view.width - w - 12;
  const y0 = view.height - h - 12;
  const scale = Math.min(w, h) / 2.2;
  return [x0 + w / 2 + p[0] * scale, y0 + h - 8 - p[2] * scale];
}

function drawSideInset(ctx: Ctx2D, session: SessionState, state: StateTick, view: View): void {
  const w = view.width * 0.22;
  const h = view.height * 0.3;
  ctx.strokeStyle = '#445';
  ctx.lineWidth = 1;
  ctx.strokeRect(view.width - w - 12, view.height - h - 12, w, h);
  const frames = forwardFrames(session.robot!, state.q);
  const points = frames.map((f) => projectSide(view, frameOrigin(f)));
  ctx.strokeStyle = '#4a6a93';
  ctx.lineWidth = 3;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.stroke();
  ctx.fillStyle = '#889';
  ctx.font = '10px sans-serif';
  ctx.fillText('side view', view.width - w - 6, view.height - h - 18);
}

function drawArm(ctx: Ctx2D, session: SessionState, state: StateTick, view: View): void {
  const frames = forwardFrames(session.robot!, state.q);
  const points = frames.map((f) => project(view, frameOrigin(f)));
  ctx.strokeStyle = '#2b4a6f';
  ctx.lineWidth = 5;
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.stroke();
  for (const [x, y] of points) circle(ctx, x, y, 4, '#18304a');
  const [bx, by] = points[0];
  circle(ctx, bx, by, 7, '#0a1a2a');
}

function drawGazeRay(ctx: Ctx2D, session: SessionState, state: StateTick, view: View): void {
  const frames = forwardFrames(session.robot!, state.q);
  const ee = frameOrigin(frames[frames.length - 1]);
  const from = project(view, ee);
  const to = project(view, state.gaze.pos);
  ctx.strokeStyle =
    state.gaze.kind === 'primary' ? '#c9a227' : state.gaze.kind === 'glance' ? '#d35' : '#7a7';
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  // actual pointing direction, short stub
  const dir = gazeDirection(frames, session.robot!.gaze_axis);
  const stub = project(view, [ee[0] + dir[0] * 0.3, ee[1] + dir[1] * 0.3, 0]);
  ctx.strokeStyle = '#c96';
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(stub[0], stub[1]);
  ctx.stroke();
}

function drawPerson(
  ctx: Ctx2D,
  session: SessionState,
  state: StateTick,
  person: StateTick['persons'][number],
  view: View,
): void {
  const [x, y] = project(view, person.pos);
  const attended = state.selection === person.id;
  const selected = session.selectedPersonId === person.id;
  circle(ctx, x, y, 10, attended ? '#c9a227' : '#4a7a4a');
  if (selected) {
    ctx.strokeStyle = '#fff';
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(x, y, 13, 0, Math.PI * 2);
    ctx.stroke();
  }
  if (person.h_left === 1) circle(ctx, x - 12, y - 12, 4, '#d35');
  if (person.h_right === 1) circle(ctx, x + 12, y - 12, 4, '#d35');
  // phi / theta bars
  const phiWidth = Math.min(40, person.phi * 20);
  ctx.fillStyle = '#c9a227';
  ctx.fillRect(x - 20, y - 24, phiWidth, 4);
  ctx.fillStyle = '#6aa';
  ctx.fillRect(x - 20, y - 18, person.theta * 40, 3);
  ctx.fillStyle = '#ddd';
  ctx.font = '11px sans-serif';
  ctx.fillText(`#${person.id}`, x - 8, y + 26);
}

function drawDrift(
  ctx: Ctx2D,
  state: StateTick,
  vt: StateTick['drift'][number],
  view: View,
): void {
  const [x, y] = project(view, vt.pos);
  const remaining = Math.max(0, vt.expires_at - state.t);
  ctx.globalAlpha = Math.min(1, remaining);
  circle(ctx, x, y, 6, '#9a7ad1');
  ctx.globalAlpha = 1;
}

function drawHud(ctx: Ctx2D, state: StateTick, view: View): void {
  ctx.fillStyle = '#bbb';
  ctx.font = '12px sans-serif';
  ctx.fillText(
    `tick ${state.tick}  t=${state.t.toFixed(2)}s  arousal ${state.arousal}  attention ${state.attention}  gaze ${state.gaze.kind}`,
    10,
    view.height - 10,
  );
}
