// View state and its pure transition function. Rendering is a pure
// function of this state, so transitions and snapshots are testable
// without a DOM or a network.

import type { FeedbackAck, IntentInfo, ItemSummary, OutfitsResponse } from './types.js'

export interface ViewState {
  items: ItemSummary[]
  anchorId: string | null
  occasion: string
  occasions: string[]
  mood: string
  user: string
  loading: boolean
  error: string | null
  offline: boolean
  response: OutfitsResponse | null
  previousIntent: IntentInfo | null
  feedbackStatus: string | null
  queuedFeedback: number
}

export const OCCASIONS = ['casual', 'work', 'smart-casual', 'going-out']

export function initialState(): ViewState {
  return {
    items: [],
    anchorId: null,
    occasion: 'casual',
    occasions: OCCASIONS,
    mood: '',
    user: 'me',
    loading: false,
    error: null,
    offline: false,
    response: null,
    previousIntent: null,
    feedbackStatus: null,
    queuedFeedback: 0,
  }
}

export type Action =
  | { kind: 'items-loaded'; items: ItemSummary[] }
  | { kind: 'select-anchor'; id: string }
  | { kind: 'set-occasion'; occasion: string }
  | { kind: 'set-mood'; mood: string }
  | { kind: 'set-user'; user: string }
  | { kind: 'generate-start' }
  | { kind: 'generate-ok'; response: OutfitsResponse }
  | { kind: 'generate-error'; message: string }
  | { kind: 'feedback-ok'; ack: FeedbackAck }
  | { kind: 'feedback-queued'; queued: number }
  | { kind: 'feedback-error'; message: string }
  | { kind: 'queue-flushed'; flushed: number }
  | { kind: 'connectivity'; offline: boolean }

export function update(state: ViewState, action: Action): ViewState {
  switch (action.kind) {
    case 'items-loaded':
      return { ...state, items: action.items, error: null }
    case 'select-anchor':
      return { ...state, anchorId: action.id }
    case 'set-occasion':
      return { ...state, occasion: action.occasion }
    case 'set-mood':
      return { ...state, mood: action.mood }
    case 'set-user':
      return { ...state, user: action.user }
    case 'generate-start':
      return { ...state, loading: true, feedbackStatus: null }
    case 'generate-ok':
      // keep the prior intent so regeneration can annotate the change
      return {
        ...state,
        loading: false,
        error: null,
        offline: false,
        previousIntent: state.response ? state.response.intent : null,
        response: action.response,
      }
    case 'generate-error':
      // prior view is retained; only the banner changes
      return { ...state, loading: false, error: action.message }
    case 'feedback-ok':
      return {
        ...state,
        feedbackStatus: `feedback recorded (v${action.ack.version}, ${action.ack.liked ? 'liked' : 'disliked'})`,
      }
    case 'feedback-queued':
      return {
        ...state,
        offline: true,
        queuedFeedback: action.queued,
        feedbackStatus: `offline: feedback queued (${action.queued} pending)`,
      }
    case 'feedback-error':
      return { ...state, feedbackStatus: `feedback failed: ${action.message}` }
    case 'queue-flushed':
      return {
        ...state,
        queuedFeedback: 0,
        offline: false,
        feedbackStatus:
          action.flushed > 0 ? `flushed ${action.flushed} queued feedback` : state.feedbackStatus,
      }
    case 'connectivity':
      return { ...state, offline: action.offline }
  }
}

// client-side re-check of the server's breakdown arithmetic
export function breakdownMismatch(b: {
  similarity: number
  direction_bonus: number
  harmony_bonus: number
  color_penalty: number
  formality_penalty: number
  occasion_penalty: number
  diversity_penalty: number
  hard_violation: boolean
  total: number
}): boolean {
  if (b.hard_violation) return b.total !== -1
  const sum =
    b.similarity +
    b.direction_bonus +
    b.harmony_bonus -
    b.color_penalty -
    b.formality_penalty -
    b.occasion_penalty -
    b.diversity_penalty
  return Math.abs(sum - b.total) > 1e-6
}

export function describeIntentChange(
  previous: IntentInfo | null,
  current: IntentInfo,
): string {
  if (previous === null) return `intent: cos ${current.anchor_cosine.toFixed(4)}, norm ${current.norm.toFixed(4)}`
  const changed =
    previous.anchor_cosine !== current.anchor_cosine || previous.norm !== current.norm
  if (!changed) return 'intent unchanged since last generation'
  return (
    `intent shifted: cos ${previous.anchor_cosine.toFixed(4)} → ${current.anchor_cosine.toFixed(4)}, ` +
    `norm ${previous.norm.toFixed(4)} → ${current.norm.toFixed(4)}`
  )
}
