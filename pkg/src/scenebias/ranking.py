"""Per-step rate sets, top/lowest scene rankings and trait indices."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import RepeatabilityRecord, SceneLabels


class RankingError(ValueError):
    pass


@dataclass(frozen=True)
class RateSet:
    """Repeatability rates of one detector at one transformation step,
    keyed by scene. Scenes with undefined rates are excluded but counted."""

    detector: str
    kind: str
    step: int
    rates: dict[int, float] = field(default_factory=dict)
    undefined_count: int = 0


@dataclass(frozen=True)
class Ranking:
    polarity: str  # "top" | "lowest"
    j: int
    entries: tuple[int, ...]
    available: bool = True

    def __post_init__(self):
        if self.available and len(self.entries) != self.j:
            raise RankingError(f"ranking has {len(self.entries)} entries, expected {self.j}")


@dataclass(frozen=True)
class AvailabilityReport:
    num_rates: int
    zero_rate_count: int
    undefined_count: int
    top_available: bool
    lowest_available: bool


@dataclass(frozen=True)
class TraitIndexVector:
    """Shares of outdoor (F), human-made (G) and simple (H) scenes in one
    ranking; unavailable when the ranking could not be formed."""

    detector: str
    kind: str
    step: int
    polarity: str
    j: int
    F: float | None
    G: float | None
    H: float | None
    available: bool
    amount: float | None = None
    scenes: tuple[int, ...] = ()

    def as_percentages(self) -> tuple[float, float, float]:
        if not self.available:
            return (0.0, 0.0, 0.0)
        return (self.F * 100.0, self.G * 100.0, self.H * 100.0)


def collect_rate_set(records: list[RepeatabilityRecord], detector: str,
                     kind: str, step: int) -> RateSet:
    """Gather the rates of every scene for one (detector, kind, step)."""
    rates: dict[int, float] = {}
    undefined = 0
    seen = set()
    for rec in records:
        if rec.detector != detector or rec.kind != kind or rec.step != step:
            continue
        if rec.scene in seen:
            raise RankingError(
                f"duplicate record for scene {rec.scene}, {detector}/{kind}/step {step}"
            )
        seen.add(rec.scene)
        if rec.defined:
            rates[rec.scene] = rec.rate
        else:
            undefined += 1
    return RateSet(detector=detector, kind=kind, step=step,
                   rates=rates, undefined_count=undefined)


def build_rankings(rate_set: RateSet, j: int) -> tuple[Ranking, Ranking, AvailabilityReport]:
    """Top and lowest rankings of length j with deterministic tie-breaks.

    The lowest ranking is unavailable when more than j scenes score exactly
    zero (the zero plateau makes the ordering meaningless); both are
    unavailable when fewer than 2j rates exist.
    """
    if j < 1:
        raise RankingError(f"j must be >= 1, got {j}")
    n = len(rate_set.rates)
    if j > n:
        raise RankingError(f"j={j} exceeds the {n} scenes with defined rates")

    zero_count = sum(1 for r in rate_set.rates.values() if r == 0.0)
    enough = n >= 2 * j
    top_available = enough
    lowest_available = enough and zero_count <= j

    # Descending rate for top, ascending for lowest; ties by ascending scene id.
    by_top = sorted(rate_set.rates.items(), key=lambda kv: (-kv[1], kv[0]))
    by_low = sorted(rate_set.rates.items(), key=lambda kv: (kv[1], kv[0]))

    top = Ranking("top", j, tuple(sid for sid, _ in by_top[:j]) if top_available else (),
                  available=top_available)
    lowest = Ranking("lowest", j,
                     tuple(sid for sid, _ in by_low[:j]) if lowest_available else (),
                     available=lowest_available)
    report = AvailabilityReport(num_rates=n, zero_rate_count=zero_count,
                                undefined_count=rate_set.undefined_count,
                                top_available=top_available,
                                lowest_available=lowest_available)
    return top, lowest, report


def compute_trait_indices(ranking: Ranking, labels: dict[int, SceneLabels],
                          *, detector: str = "", kind: str = "",
                          step: int = 0, amount: float | None = None) -> TraitIndexVector:
    """Mean of each label over the ranking's scenes (exact multiples of 1/j)."""
    if not ranking.available:
        return TraitIndexVector(detector=detector, kind=kind, step=step,
                                polarity=ranking.polarity, j=ranking.j,
                                F=None, G=None, H=None, available=False,
                                amount=amount)
    missing = [sid for sid in ranking.entries if sid not in labels]
    if missing:
        raise RankingError(f"missing labels for scenes {missing}")
    f = sum(labels[sid].outdoor for sid in ranking.entries)
    g = sum(labels[sid].human_made for sid in ranking.entries)
    h = sum(labels[sid].simple for sid in ranking.entries)
    return TraitIndexVector(detector=detector, kind=kind, step=step,
                            polarity=ranking.polarity, j=ranking.j,
                            F=f / ranking.j, G=g / ranking.j, H=h / ranking.j,
                            available=True, amount=amount,
                            scenes=ranking.entries)


def label_balance(labels: dict[int, SceneLabels]) -> tuple[float, float, float]:
    """Corpus-wide shares of outdoor, human-made and simple scenes."""
    if not labels:
        return (0.0, 0.0, 0.0)
    n = len(labels)
    f = sum(lab.outdoor for lab in labels.values())
    g = sum(lab.human_made for lab in labels.values())
    h = sum(lab.simple for lab in labels.values())
    return (f / n, g / n, h / n)


def expected_record_count(n: int, schedule_lengths) -> int:
    """Number of repeatability records for n scenes: the reference step of
    each schedule produces no record."""
    return n * sum(m - 1 for m in schedule_lengths)


def trait_index_table(records: list[RepeatabilityRecord],
                      labels: dict[int, SceneLabels],
                      j: int,
                      amounts: dict[tuple[str, int], float] | None = None
                      ) -> list[TraitIndexVector]:
    """All trait-index vectors derivable from a record collection, ordered
    by (detector, kind, step, polarity). amounts maps (kind, step) to the
    transformation amount for presentation."""
    keys = sorted({(r.detector, r.kind) for r in records})
    vectors: list[TraitIndexVector] = []
    for detector, kind in keys:
        steps = sorted({r.step for r in records
                        if r.detector == detector and r.kind == kind})
        for step in steps:
            rate_set = collect_rate_set(records, detector, kind, step)
            top, lowest, _ = build_rankings(rate_set, j)
            amount = amounts.get((kind, step)) if amounts else None
            for ranking in (top, lowest):
                vectors.append(compute_trait_indices(
                    ranking, labels, detector=detector, kind=kind,
                    step=step, amount=amount))
    return vectors
