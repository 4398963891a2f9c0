"""Rule-based comparison system: link an event to the nearest place name.

Marks the recognized place span in closest linear proximity to the event
verb; everything else is 0. Exists to reproduce the qualitative behavior
of the weakest comparison row, not to be tuned.
"""

from __future__ import annotations

from .corpus import AnnotatedSentence, LabelVector

# Entity labels counted as recognized places.
PLACE_NER_LABELS = frozenset({"LOC", "GPE", "FAC"})


def link_nearest(sentence: AnnotatedSentence, verb_index: int) -> LabelVector:
    """Label the contiguous same-entity span of the place token nearest the verb.

    Distance is measured in tokens; ties prefer the earlier token. With no
    place token in the sentence, returns all zeros.
    """
    n = len(sentence.tokens)
    if not 0 <= verb_index < n:
        raise IndexError(f"verb_index {verb_index} out of range for {n} tokens")

    labels = [0] * n
    best = None
    for t in sentence.tokens:
        if t.ner not in PLACE_NER_LABELS:
            continue
        distance = abs(t.index - verb_index)
        if best is None or distance < best[0]:
            best = (distance, t.index)
    if best is None:
        return labels

    chosen = best[1]
    entity = sentence.tokens[chosen].ner
    start = chosen
    while start > 0 and sentence.tokens[start - 1].ner == entity:
        start -= 1
    end = chosen
    while end + 1 < n and sentence.tokens[end + 1].ner == entity:
        end += 1
    for i in range(start, end + 1):
        labels[i] = 1
    return labels


class NearestPlaceLinker:
    """Predictor-protocol adapter so the rule system plugs into evaluation."""

    name = "baseline"

    def predict(self, sentence: AnnotatedSentence, verb_index: int):
        labels = link_nearest(sentence, verb_index)
        return labels, [float(v) for v in labels]
