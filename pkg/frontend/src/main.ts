// Browser wiring: websocket, controls, pointer handling, render loop.

import { InteractionController } from './interactions';
import { renderScene, project, type View } from './render';
import { SessionState } from './session';
import type { Vec3 } from './protocol';

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const noticeEl = document.getElementById('notice')!;
const arousalEl = document.getElementById('arousal') as HTMLInputElement;
const attentionEl = document.getElementById('attention') as HTMLInputElement;

const view: View = { width: canvas.width, height: canvas.height, scale: 120 };

function notice(text: string): void {
  noticeEl.textContent = text;
}

const session = new SessionState({
  onError: (message, field) => notice(field ? `${field}: ${message}` : message),
  onStatus: (status) => notice(`connection: ${status}`),
});
const controls = new InteractionController(session, notice);

const url = `ws://${location.host}/session`;
const ws = new WebSocket(url);
ws.onopen = () => session.attach({ send: (d) => ws.send(d) });
ws.onmessage = (ev: MessageEvent) => session.handleRaw(String(ev.data));
ws.onclose = () => session.detach();
ws.onerror = () => notice(`websocket error (${url})`);

function unproject(x: number, y: number): Vec3 {
  return [(x - view.width / 2) / view.scale, (view.height / 2 - y) / view.scale, 1.1];
}

function personAt(x: number, y: number): number | null {
  const persons = session.latest?.persons ?? [];
  for (const p of persons) {
    const [px, py] = project(view, p.pos);
    if ((px - x) ** 2 + (py - y) ** 2 <= 14 ** 2) return p.id;
  }
  return null;
}

let dragging: number | null = null;

canvas.addEventListener('pointerdown', (ev) => {
  const hit = personAt(ev.offsetX, ev.offsetY);
  session.selectedPersonId = hit;
  dragging = hit;
});
canvas.addEventListener('pointermove', (ev) => {
  if (dragging !== null) controls.dragTo(dragging, unproject(ev.offsetX, ev.offsetY));
});
canvas.addEventListener('pointerup', () => (dragging = null));
canvas.addEventListener('dblclick', (ev) => {
  if (personAt(ev.offsetX, ev.offsetY) === null)
    controls.spawnAt(unproject(ev.offsetX, ev.offsetY));
});

window.addEventListener('keydown', (ev) => {
  if (ev.key === 'l') controls.toggleHand('left');
  if (ev.key === 'r') controls.toggleHand('right');
  if (ev.key === 'Delete' || ev.key === 'Backspace') controls.removeSelected();
});

arousalEl.addEventListener('input', () => controls.setArousal(Number(arousalEl.value)));
attentionEl.addEventListener('change', () =>
  controls.setAttention(attentionEl.checked ? 'high' : 'low'),
);

function frame(): void {
  renderScene(ctx, session, view);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
