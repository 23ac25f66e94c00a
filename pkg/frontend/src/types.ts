// Shapes of the service API (docs/api.md). Every number the UI shows
// originates from these responses; the client never fabricates scores.

export interface ItemSummary {
  id: string
  name: string
  category: string
  color: string
  material: string
  style_tags: string[]
  occasion_tags: string[]
  material_weight: number | null
  mood_score?: number
}

export interface Breakdown {
  similarity: number
  direction_bonus: number
  harmony_bonus: number
  color_penalty: number
  formality_penalty: number
  occasion_penalty: number
  diversity_penalty: number
  hard_violation: boolean
  total: number
}

export interface OutfitPanel {
  direction: string
  items: ItemSummary[]
  breakdown: Breakdown | null
  rank_sum: number | null
  gap: string | null
}

export interface IntentInfo {
  anchor_cosine: number
  norm: number
}

export interface OutfitsResponse {
  anchor: ItemSummary
  occasion: string
  seed: number
  config_hash: string
  cached: boolean
  intent: IntentInfo
  outfits: OutfitPanel[]
  mood?: string
  user?: string
}

export interface FeedbackAck {
  user: string
  version: number
  liked: boolean
}

export interface PendingFeedback {
  user: string
  item_ids: string[]
  liked: boolean
}
