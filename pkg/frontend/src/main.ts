// Mounts the app: one rendering loop over the pure (state, render)
// pair, event delegation on the root, network effects through the
// ApiClient. New user actions cancel in-flight generations.

import { ApiClient } from './api.js'
import { render } from './render.js'
import { Action, initialState, update, ViewState } from './state.js'

export interface App {
  state(): ViewState
  dispatch(action: Action): void
  generate(seed?: number): Promise<void>
  root: HTMLElement
}

export function mountApp(root: HTMLElement, baseUrl = '', storage?: Storage): App {
  const api = new ApiClient(baseUrl, storage ?? globalThis.localStorage)
  let state = initialState()

  const repaint = () => {
    root.innerHTML = render(state)
  }
  const dispatch = (action: Action) => {
    state = update(state, action)
    repaint()
  }

  async function generate(seed?: number): Promise<void> {
    if (!state.anchorId) return
    dispatch({ kind: 'generate-start' })
    try {
      const response = await api.fetchOutfits({
        anchor: state.anchorId,
        occasion: state.occasion,
        mood: state.mood || undefined,
        user: state.user || undefined,
        seed,
      })
      dispatch({ kind: 'generate-ok', response })
    } catch (err) {
      if ((err as Error).name === 'AbortError') return
      dispatch({ kind: 'generate-error', message: (err as Error).message })
    }
  }

  async function sendFeedback(panelIndex: number, liked: boolean): Promise<void> {
    const panel = state.response?.outfits[panelIndex]
    if (!panel || panel.items.length === 0) return
    const feedback = {
      user: state.user || 'me',
      item_ids: panel.items.map((i) => i.id),
      liked,
    }
    try {
      const ack = await api.postFeedback(feedback)
      dispatch({ kind: 'feedback-ok', ack })
    } catch {
      // no optimistic state: queue locally and flush on reconnect
      const queued = api.enqueueFeedback(feedback)
      dispatch({ kind: 'feedback-queued', queued })
    }
  }

  async function flushQueue(): Promise<void> {
    if (api.queuedFeedback().length === 0) return
    const flushed = await api.flushQueue()
    dispatch({ kind: 'queue-flushed', flushed })
  }

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest('[data-action]')
    if (!(target instanceof HTMLElement)) return
    switch (target.dataset.action) {
      case 'select-anchor':
        dispatch({ kind: 'select-anchor', id: target.dataset.id ?? '' })
        break
      case 'generate':
        void generate()
        break
      case 'regenerate':
        // fresh seed so the updated taste visibly enters retrieval
        void generate(Date.now() % 2 ** 31)
        break
      case 'feedback':
        void sendFeedback(Number(target.dataset.panel), target.dataset.liked === 'true')
        break
    }
  })

  root.addEventListener('change', (event) => {
    const target = event.target as HTMLElement
    if (!(target instanceof HTMLSelectElement || target instanceof HTMLInputElement)) return
    switch (target.dataset.action) {
      case 'set-occasion':
        dispatch({ kind: 'set-occasion', occasion: target.value })
        break
      case 'set-mood':
        dispatch({ kind: 'set-mood', mood: target.value })
        break
      case 'set-user':
        dispatch({ kind: 'set-user', user: target.value })
        break
    }
  })

  globalThis.addEventListener?.('online', () => {
    dispatch({ kind: 'connectivity', offline: false })
    void flushQueue()
  })
  globalThis.addEventListener?.('offline', () =>
    dispatch({ kind: 'connectivity', offline: true }),
  )

  repaint()
  void api
    .fetchItems()
    .then((items) => dispatch({ kind: 'items-loaded', items }))
    .catch((err) => dispatch({ kind: 'generate-error', message: (err as Error).message }))
  void flushQueue()

  return {
    root,
    dispatch,
    generate,
    state: () => state,
  }
}

declare global {
  interface Window {
    outfitgenApp?: App
  }
}

if (typeof document !== 'undefined') {
  const root = document.getElementById('app')
  if (root) {
    window.outfitgenApp = mountApp(root)
  }
}
