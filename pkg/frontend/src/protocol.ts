// Message schema for the live-session websocket protocol.
// Every frame carries one JSON object {type, seq, payload}.

import { z } from 'zod';

export const PROTOCOL_VERSION = 1;

const vec3 = z.tuple([z.number(), z.number(), z.number()]);

export const RobotInfoSchema = z.object({
  dh_parameters: z.array(z.array(z.number()).length(4)).length(6),
  joint_limits: z.array(z.array(z.number()).length(2)).length(6),
  base_pos: vec3,
  gaze_axis: vec3,
});
export type RobotInfo = z.infer<typeof RobotInfoSchema>;

export const PersonScoreSchema = z.object({
  id: z.number().int(),
  pos: vec3,
  phi: z.number(),
  P: z.number(),
  V: z.number(),
  theta: z.number(),
  h_left: z.number(),
  h_right: z.number(),
});
export type PersonScore = z.infer<typeof PersonScoreSchema>;

export const StateTickSchema = z.object({
  tick: z.number().int(),
  t: z.number(),
  q: z.array(z.number()).length(6),
  ee: z.object({ pos: vec3, rot: z.array(vec3).length(3) }),
  gaze: z.object({
    kind: z.enum(['glance', 'drift', 'primary', 'idle']),
    id: z.number().int().nullable(),
    pos: vec3,
  }),
  selection: z.number().int().nullable(),
  persons: z.array(PersonScoreSchema),
  drift: z.array(z.object({ id: z.number().int(), pos: vec3, expires_at: z.number() })),
  arousal: z.number(),
  attention: z.enum(['low', 'high']),
  saturated: z.boolean(),
});
export type StateTick = z.infer<typeof StateTickSchema>;

export const WelcomeSchema = z.object({
  version: z.number().int(),
  dt: z.number(),
  robot: RobotInfoSchema,
});
export type Welcome = z.infer<typeof WelcomeSchema>;

const envelope = z.object({
  type: z.enum(['welcome', 'state', 'ack', 'error']),
  seq: z.number().int(),
  payload: z.unknown(),
});

export type ServerMessage =
  | { type: 'welcome'; seq: number; payload: Welcome }
  | { type: 'state'; seq: number; payload: StateTick }
  | { type: 'ack'; seq: number; payload: { op: string } }
  | { type: 'error'; seq: number; payload: { message: string; field: string | null } };

export function parseServerMessage(raw: string): ServerMessage {
  const env = envelope.parse(JSON.parse(raw));
  switch (env.type) {
    case 'welcome':
      return { type: 'welcome', seq: env.seq, payload: WelcomeSchema.parse(env.payload) };
    case 'state':
      return { type: 'state', seq: env.seq, payload: StateTickSchema.parse(env.payload) };
    case 'ack':
      return {
        type: 'ack',
        seq: env.seq,
        payload: z.object({ op: z.string() }).parse(env.payload),
      };
    case 'error':
      return {
        type: 'error',
        seq: env.seq,
        payload: z
          .object({ message: z.string(), field: z.string().nullable().default(null) })
          .parse(env.payload),
      };
  }
}

export type Vec3 = [number, number, number];

export type ClientCommand =
  | { op: 'set_arousal'; level: number }
  | { op: 'set_attention'; mode: 'low' | 'high' }
  | { op: 'spawn_person'; id: number; pos: Vec3 }
  | { op: 'move_person'; id: number; pos: Vec3 }
  | { op: 'set_hand'; id: number; hand: 'left' | 'right'; raised: boolean }
  | { op: 'remove_person'; id: number }
  | { op: 'reset'; seed: number }
  | { op: 'set_rate'; ticks_per_message: number };

export function encodeHello(seq = 0): string {
  return JSON.stringify({ type: 'hello', seq, payload: { version: PROTOCOL_VERSION } });
}

export function encodeCommand(seq: number, command: ClientCommand): string {
  return JSON.stringify({ type: 'command', seq, payload: command });
}
