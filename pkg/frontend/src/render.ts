// Pure renderer: ViewState in, HTML string out. All numbers shown come
// from service response fields; the only client-side arithmetic is the
// breakdown re-check, which renders a warning rather than a value.

import { breakdownMismatch, describeIntentChange, ViewState } from './state.js'
import type { Breakdown, ItemSummary, OutfitPanel } from './types.js'

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

function bar(label: string, value: number): string {
  const width = Math.min(120, Math.abs(value) * 300)
  const side = value >= 0 ? 'pos' : 'neg'
  return (
    `<div class="bar-row"><span class="bar-label">${esc(label)}</span>` +
    `<span class="bar ${side}" style="width:${width.toFixed(1)}px"></span>` +
    `<span class="bar-value">${value >= 0 ? '+' : ''}${value.toFixed(3)}</span></div>`
  )
}

function breakdownView(b: Breakdown): string {
  const rows = [
    bar('similarity', b.similarity),
    bar('direction', b.direction_bonus),
    bar('harmony', b.harmony_bonus),
    bar('color', -b.color_penalty),
    bar('formality', -b.formality_penalty),
    bar('occasion', -b.occasion_penalty),
    bar('diversity', -b.diversity_penalty),
  ].join('')
  const violation = b.total <= -1 ? '<span class="badge violation">hard violation</span>' : ''
  const mismatch = breakdownMismatch(b)
    ? '<span class="badge mismatch">breakdown mismatch</span>'
    : ''
  return (
    `<div class="breakdown">${rows}` +
    `<div class="total-row">total <strong>${b.total.toFixed(3)}</strong> ${violation}${mismatch}</div></div>`
  )
}

function itemCard(item: ItemSummary, duplicated: boolean): string {
  const mood =
    item.mood_score !== undefined
      ? `<span class="mood">mood ${item.mood_score.toFixed(2)}</span>`
      : ''
  return (
    `<li class="item-card${duplicated ? ' duplicated' : ''}" data-item-id="${esc(item.id)}">` +
    `<span class="swatch" data-color="${esc(item.color)}"></span>` +
    `<span class="item-name">${esc(item.name)}</span>` +
    `<span class="item-meta">${esc(item.category)} · ${esc(item.color)} · ${esc(
      item.style_tags.join(', '),
    )}</span>${mood}</li>`
  )
}

function panelView(panel: OutfitPanel, index: number, seenTwice: Set<string>): string {
  if (panel.gap !== null) {
    return (
      `<article class="panel gap-panel" data-direction="${esc(panel.direction)}">` +
      `<h3>${esc(panel.direction)}</h3>` +
      `<p class="gap">no outfit: ${esc(panel.gap)}</p></article>`
    )
  }
  const items = panel.items.map((i) => itemCard(i, seenTwice.has(i.id))).join('')
  return (
    `<article class="panel" data-direction="${esc(panel.direction)}">` +
    `<h3>${esc(panel.direction)}</h3>` +
    `<ul class="outfit-items">${items}</ul>` +
    (panel.breakdown ? breakdownView(panel.breakdown) : '') +
    `<div class="actions">` +
    `<button type="button" data-action="feedback" data-panel="${index}" data-liked="true">Like</button>` +
    `<button type="button" data-action="feedback" data-panel="${index}" data-liked="false">Dislike</button>` +
    `</div></article>`
  )
}

function catalogView(state: ViewState): string {
  const cards = state.items
    .map(
      (item) =>
        `<button type="button" class="catalog-card${
          state.anchorId === item.id ? ' selected' : ''
        }" data-action="select-anchor" data-id="${esc(item.id)}">` +
        `<span class="swatch" data-color="${esc(item.color)}"></span>` +
        `${esc(item.name)}<small>${esc(item.category)}</small></button>`,
    )
    .join('')
  return `<section class="catalog" aria-label="catalog">${cards}</section>`
}

export function render(state: ViewState): string {
  const banners: string[] = []
  if (state.offline) banners.push('<div class="banner offline">offline: feedback will be queued and flushed on reconnect</div>')
  if (state.error) banners.push(`<div class="banner error">${esc(state.error)}</div>`)

  const occasionOptions = state.occasions
    .map(
      (o) =>
        `<option value="${esc(o)}"${o === state.occasion ? ' selected' : ''}>${esc(o)}</option>`,
    )
    .join('')

  let outfitsView = '<p class="hint">pick an anchor item, then generate</p>'
  let metaView = ''
  if (state.response) {
    const counts = new Map<string, number>()
    for (const panel of state.response.outfits)
      for (const item of panel.items) counts.set(item.id, (counts.get(item.id) ?? 0) + 1)
    const seenTwice = new Set([...counts].filter(([, n]) => n > 1).map(([id]) => id))
    outfitsView = state.response.outfits
      .map((panel, index) => panelView(panel, index, seenTwice))
      .join('')
    metaView =
      `<div class="meta">seed <code>${state.response.seed}</code> · config ` +
      `<code>${esc(state.response.config_hash)}</code>` +
      `${state.response.cached ? ' · cached' : ''}</div>` +
      `<div class="intent-note">${esc(
        describeIntentChange(state.previousIntent, state.response.intent),
      )}</div>`
  }

  const feedback = state.feedbackStatus
    ? `<div class="feedback-status">${esc(state.feedbackStatus)}` +
      `<button type="button" data-action="regenerate">Regenerate with updated taste</button></div>`
    : ''

  return (
    `<header><h1>outfitgen</h1>${metaView}</header>` +
    banners.join('') +
    `<section class="controls">` +
    `<label>occasion <select data-action="set-occasion">${occasionOptions}</select></label>` +
    `<label>mood <input data-action="set-mood" value="${esc(state.mood)}" placeholder="e.g. workout"/></label>` +
    `<label>user <input data-action="set-user" value="${esc(state.user)}"/></label>` +
    `<button type="button" data-action="generate" ${
      state.anchorId && !state.loading ? '' : 'disabled'
    }>${state.loading ? 'Generating…' : 'Generate outfits'}</button>` +
    `</section>` +
    catalogView(state) +
    `<section class="outfits" aria-live="polite">${outfitsView}</section>` +
    feedback
  )
}
