"""Streaming execution of the extractor over synchronized line buffers.

The model follows the hardware-style dataflow: raw pixels arrive in raster
order, one per cycle.  A 31-line buffer (LB1) exposes the detection window
(RB1); a 7-line buffer (LB2) feeds the Gaussian filter window (RB2); the
smoothed stream fills a second 31-line buffer (LB3) whose window (RB3)
serves descriptor computation.  While no feature is pending, every buffer
advances in lockstep.  When the smoothed patch of a detected feature is
fully buffered, the pipeline stalls (one cycle per pattern pair), computes
the descriptor, and resumes shifting.  Emitted results are identical to the
batch pipeline; the point of the structure is that only a fixed number of
lines is ever resident instead of whole smoothed frames.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .descriptor import (
    GAUSSIAN_DIVISOR,
    GAUSSIAN_KERNEL,
    KERNEL_APRON,
    Descriptor,
    descriptor_from_patch,
)
from .fast import RING_DX, RING_DY, segment_test
from .features import FeaturePoint
from .orientation import (
    Moments,
    Orientation,
    circular_mask,
    compute_sincos,
    truncate_moments,
)
from .validation import DETECTION_MARGIN, MIN_DETECTION_SIDE, PATCH_RADIUS

DETECTION_LINES = 31
FILTER_LINES = 7

#: Savings figure published for the reference hardware design ("575K bytes").
REFERENCE_SAVINGS_BYTES = 575 * 1024
REFERENCE_SAVINGS_LABEL = "575K bytes"

TRACE_EVENTS = ("feature_detected", "stall_begin", "stall_end", "descriptor_emitted")


class StreamClosedError(RuntimeError):
    """Raised when pixels are pushed after the frame completed."""


class LineBuffer:
    """Ring of the most recent ``lines`` rows of a raster pixel stream."""

    def __init__(self, lines: int, line_width: int):
        self.lines = lines
        self.line_width = line_width
        self.storage = np.zeros((lines, line_width), dtype=np.uint8)
        self.pixels_consumed = 0

    @property
    def capacity_bytes(self) -> int:
        return self.lines * self.line_width

    def write(self, x: int, y: int, value: int) -> None:
        self.storage[y % self.lines, x] = value
        self.pixels_consumed += 1

    def window(self, cx: int, cy: int, half_h: int, half_w: int) -> np.ndarray:
        """Subwindow centered at absolute (cx, cy); rows must still be resident."""
        rows = np.arange(cy - half_h, cy + half_h + 1) % self.lines
        return self.storage[rows][:, cx - half_w : cx + half_w + 1]


class RegisterBank:
    """Fully materialized window fed from a line buffer.

    The bank is refreshed on demand from its line buffer rather than shifted
    every cycle; its contents always equal the corresponding subwindow of the
    pixels pushed so far.
    """

    def __init__(self, height: int, width: int):
        self.height = height
        self.width = width
        self.values = np.zeros((height, width), dtype=np.uint8)

    @property
    def capacity_bytes(self) -> int:
        return self.height * self.width

    def load(self, lb: LineBuffer, cx: int, cy: int) -> np.ndarray:
        self.values = lb.window(cx, cy, self.height // 2, self.width // 2)
        return self.values


@dataclass(frozen=True)
class StreamConfig:
    pattern: np.ndarray
    threshold: int = 20
    wordlen: int | None = 8
    collect_trace: bool = False


@dataclass(frozen=True)
class StreamEvent:
    cycle: int
    event: str
    x: int
    y: int
    level: int


@dataclass
class StreamStats:
    per_level_counts: list[int]
    stall_events: int
    stall_cycles: int
    cycles: int
    queue_high_water: int
    buffer_capacity_bytes: int


@dataclass
class StreamResult:
    records: list[tuple[FeaturePoint, Descriptor]]
    stats: StreamStats
    trace: list[StreamEvent] | None = None


@dataclass
class _Pending:
    x: int
    y: int
    moments: Moments
    orientation: Orientation


class StreamState:
    """Single-level streaming pipeline state; pixels arrive in raster order."""

    def __init__(self, width: int, height: int, level: int, config: StreamConfig):
        if width < MIN_DETECTION_SIDE or height < MIN_DETECTION_SIDE:
            raise ValueError(
                f"frame {width}x{height} is below the {MIN_DETECTION_SIDE}-pixel minimum"
            )
        self.width = width
        self.height = height
        self.level = level
        self.config = config
        self.mask = circular_mask()

        self.lb1 = LineBuffer(DETECTION_LINES, width)
        self.lb2 = LineBuffer(FILTER_LINES, width)
        self.lb3 = LineBuffer(DETECTION_LINES, width)
        self.rb1 = RegisterBank(DETECTION_LINES, DETECTION_LINES)
        self.rb2 = RegisterBank(FILTER_LINES, FILTER_LINES)
        self.rb3 = RegisterBank(DETECTION_LINES, DETECTION_LINES)

        self.cursor = 0
        self.cycle = 0
        self.finished = False
        self.pending: deque[_Pending] = deque()
        self.queue_high_water = 0
        self.stall_events = 0
        self.stall_cycles = 0
        self._last_smoothed: tuple[int, int] | None = None
        self.trace: list[StreamEvent] | None = [] if config.collect_trace else None

    @property
    def buffer_capacity_bytes(self) -> int:
        banks = (self.lb1, self.lb2, self.lb3, self.rb1, self.rb2, self.rb3)
        return sum(b.capacity_bytes for b in banks)

    def _record(self, event: str, x: int, y: int) -> None:
        if self.trace is not None:
            self.trace.append(StreamEvent(self.cycle, event, x, y, self.level))

    def push_pixel(self, value: int) -> list[tuple[FeaturePoint, Descriptor]]:
        """Consume one raster pixel; returns any (feature, descriptor) pairs
        whose descriptor window completed on this cycle."""
        if self.finished:
            raise StreamClosedError("push after end-of-frame")
        x = self.cursor % self.width
        y = self.cursor // self.width
        self.lb1.write(x, y, value)
        self.lb2.write(x, y, value)
        self.cursor += 1
        self.cycle += 1

        emitted: list[tuple[FeaturePoint, Descriptor]] = []
        self._detect_at(x - PATCH_RADIUS, y - PATCH_RADIUS)
        self._filter_at(x - KERNEL_APRON, y - KERNEL_APRON, emitted)

        if self.cursor == self.width * self.height:
            self.finished = True
        return emitted

    def _detect_at(self, cx: int, cy: int) -> None:
        m = DETECTION_MARGIN
        if not (m <= cx < self.width - m and m <= cy < self.height - m):
            return
        ring_rows = (cy + RING_DY) % DETECTION_LINES
        ring = self.lb1.storage[ring_rows, cx + RING_DX]
        center = int(self.lb1.storage[cy % DETECTION_LINES, cx])
        if not segment_test(center, ring, self.config.threshold):
            return
        window = self.rb1.load(self.lb1, cx, cy).astype(np.int64)
        moments = Moments(
            m10=int((self.mask.weight_x * window).sum()),
            m01=int((self.mask.weight_y * window).sum()),
        )
        if self.config.wordlen is None:
            orientation = compute_sincos(moments)
        else:
            orientation = compute_sincos(truncate_moments(moments, self.config.wordlen))
        self.pending.append(_Pending(cx, cy, moments, orientation))
        self.queue_high_water = max(self.queue_high_water, len(self.pending))
        self._record("feature_detected", cx, cy)

    def _filter_at(self, gx: int, gy: int, emitted: list) -> None:
        a = KERNEL_APRON
        if not (a <= gx < self.width - a and a <= gy < self.height - a):
            return
        window = self.rb2.load(self.lb2, gx, gy).astype(np.int64)
        value = int(((GAUSSIAN_KERNEL * window).sum() + GAUSSIAN_DIVISOR // 2) // GAUSSIAN_DIVISOR)
        self.lb3.write(gx, gy, value)
        self._last_smoothed = (gx, gy)
        while self.pending and self._patch_ready(self.pending[0]):
            emitted.append(self._emit(self.pending.popleft()))

    def _patch_ready(self, p: _Pending) -> bool:
        if self._last_smoothed is None:
            return False
        gx, gy = self._last_smoothed
        edge = p.y + PATCH_RADIUS
        return gy > edge or (gy == edge and gx >= p.x + PATCH_RADIUS)

    def _emit(self, p: _Pending) -> tuple[FeaturePoint, Descriptor]:
        # descriptor computation halts the shift registers, one cycle per pair
        self._record("stall_begin", p.x, p.y)
        self.stall_events += 1
        duration = len(self.config.pattern)
        self.cycle += duration
        self.stall_cycles += duration
        patch = self.rb3.load(self.lb3, p.x, p.y)
        descriptor = descriptor_from_patch(patch, p.orientation, self.config.pattern)
        self._record("stall_end", p.x, p.y)
        self._record("descriptor_emitted", p.x, p.y)
        point = FeaturePoint(
            level=self.level,
            x=p.x,
            y=p.y,
            m10=p.moments.m10,
            m01=p.moments.m01,
            sin=p.orientation.sin,
            cos=p.orientation.cos,
        )
        return point, descriptor


def run_stream(pyramid, config: StreamConfig) -> StreamResult:
    """Stream both pyramid levels through the dataflow, level 0 first."""
    records: list[tuple[FeaturePoint, Descriptor]] = []
    trace: list[StreamEvent] | None = [] if config.collect_trace else None
    counts = []
    stall_events = 0
    stall_cycles = 0
    cycles = 0
    high_water = 0
    capacity = 0

    for level, img in enumerate(pyramid.levels):
        h, w = img.shape
        state = StreamState(w, h, level, config)
        capacity += state.buffer_capacity_bytes
        level_count = 0
        for value in img.ravel().tolist():
            for pair in state.push_pixel(value):
                records.append(pair)
                level_count += 1
        assert not state.pending, "features left pending at end of frame"
        counts.append(level_count)
        stall_events += state.stall_events
        stall_cycles += state.stall_cycles
        cycles += state.cycle
        high_water = max(high_water, state.queue_high_water)
        if trace is not None and state.trace is not None:
            trace.extend(state.trace)

    stats = StreamStats(
        per_level_counts=counts,
        stall_events=stall_events,
        stall_cycles=stall_cycles,
        cycles=cycles,
        queue_high_water=high_water,
        buffer_capacity_bytes=capacity,
    )
    return StreamResult(records=records, stats=stats, trace=trace)


def level_buffer_bytes(width: int) -> int:
    """Static streaming footprint for one level at the given line width."""
    lines = (DETECTION_LINES + FILTER_LINES + DETECTION_LINES) * width
    banks = DETECTION_LINES**2 + FILTER_LINES**2 + DETECTION_LINES**2
    return lines + banks


@dataclass(frozen=True)
class MemoryReport:
    """Streaming-buffer footprint vs. buffering whole smoothed frames."""

    level_dims: tuple[tuple[int, int], ...]
    per_level_streaming: tuple[int, ...]
    streaming_bytes: int
    baseline_bytes: int
    savings_bytes: int
    reference_savings_bytes: int = field(default=REFERENCE_SAVINGS_BYTES)

    def to_dict(self) -> dict:
        return {
            "level_dims": [list(d) for d in self.level_dims],
            "streaming_bytes": self.streaming_bytes,
            "baseline_bytes": self.baseline_bytes,
            "savings_bytes": self.savings_bytes,
            "paper_reference_bytes": self.reference_savings_bytes,
        }


def memory_report(level_dims) -> MemoryReport:
    """Account line-buffer/register bytes against whole-frame buffering.

    ``level_dims`` is a sequence of (width, height) pairs, one per level.
    The baseline stores every level's full smoothed frame; the streaming
    figure is the summed static capacity of the per-level line buffers and
    register banks.  Savings can be negative for tiny frames and are
    reported as computed.
    """
    dims = tuple((int(w), int(h)) for w, h in level_dims)
    if not dims:
        raise ValueError("at least one level is required")
    per_level = tuple(level_buffer_bytes(w) for w, _ in dims)
    streaming = sum(per_level)
    baseline = sum(w * h for w, h in dims)
    return MemoryReport(
        level_dims=dims,
        per_level_streaming=per_level,
        streaming_bytes=streaming,
        baseline_bytes=baseline,
        savings_bytes=baseline - streaming,
    )


def trace_to_csv(trace) -> str:
    lines = ["cycle,event,x,y,level"]
    for e in trace:
        lines.append(f"{e.cycle},{e.event},{e.x},{e.y},{e.level}")
    return "\n".join(lines) + "\n"
