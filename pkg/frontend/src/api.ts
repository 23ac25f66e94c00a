// Typed client for the service API with in-flight cancellation and an
// offline feedback queue (localStorage-backed, flushed on reconnect).

import type { FeedbackAck, ItemSummary, OutfitsResponse, PendingFeedback } from './types.js'

const QUEUE_KEY = 'outfitgen.pending_feedback'

export class ApiClient {
  private inflight: AbortController | null = null

  constructor(
    readonly baseUrl: string = '',
    private storage: Storage = globalThis.localStorage,
  ) {}

  async fetchItems(): Promise<ItemSummary[]> {
    const res = await fetch(`${this.baseUrl}/items`)
    if (!res.ok) throw new Error(`items request failed (${res.status})`)
    const body = await res.json()
    return body.items as ItemSummary[]
  }

  // a new generation request cancels the previous one
  async fetchOutfits(params: {
    anchor: string
    occasion: string
    mood?: string
    user?: string
    seed?: number
  }): Promise<OutfitsResponse> {
    this.inflight?.abort()
    const controller = new AbortController()
    this.inflight = controller
    const query = new URLSearchParams({ anchor: params.anchor, occasion: params.occasion })
    if (params.mood) query.set('mood', params.mood)
    if (params.user) query.set('user', params.user)
    if (params.seed !== undefined) query.set('seed', String(params.seed))
    const res = await fetch(`${this.baseUrl}/outfits?${query}`, { signal: controller.signal })
    const body = await res.json()
    if (!res.ok) {
      throw new Error(body?.error?.message ?? `generation failed (${res.status})`)
    }
    return body as OutfitsResponse
  }

  async postFeedback(feedback: PendingFeedback): Promise<FeedbackAck> {
    const res = await fetch(`${this.baseUrl}/feedback`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(feedback),
    })
    const body = await res.json()
    if (!res.ok) throw new Error(body?.error?.message ?? `feedback failed (${res.status})`)
    return body as FeedbackAck
  }

  queuedFeedback(): PendingFeedback[] {
    try {
      return JSON.parse(this.storage.getItem(QUEUE_KEY) ?? '[]') as PendingFeedback[]
    } catch {
      return []
    }
  }

  enqueueFeedback(feedback: PendingFeedback): number {
    const queue = this.queuedFeedback()
    queue.push(feedback)
    this.storage.setItem(QUEUE_KEY, JSON.stringify(queue))
    return queue.length
  }

  // replays queued feedback in order; stops at the first failure
  async flushQueue(): Promise<number> {
    const queue = this.queuedFeedback()
    let flushed = 0
    while (queue.length > 0) {
      try {
        await this.postFeedback(queue[0])
      } catch {
        break
      }
      queue.shift()
      flushed += 1
    }
    this.storage.setItem(QUEUE_KEY, JSON.stringify(queue))
    return flushed
  }
}
