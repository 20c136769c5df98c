"""
Shared utilities for solver runs and the benchmark harness
"""

import json
import os
import time
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence, Tuple


class ExecutionTracker:
    """Track wall time of a run with a monotonic clock"""

    def __init__(self):
        self.start_time = time.perf_counter()
        self.start_timestamp = datetime.now(timezone.utc)
        self.end_time = None
        self.end_timestamp = None

    def finish(self):
        """Mark execution as finished"""
        self.end_time = time.perf_counter()
        self.end_timestamp = datetime.now(timezone.utc)

    def get_duration(self) -> float:
        """Elapsed seconds, up to now if the run has not finished"""
        if self.end_time is None:
            return time.perf_counter() - self.start_time
        return self.end_time - self.start_time

    def get_duration_ms(self) -> float:
        """Elapsed milliseconds"""
        return self.get_duration() * 1000.0


class SummaryWriter:
    """Markdown experiment report for the GitHub Actions step summary"""

    def __init__(self, title: str, emoji: str = "📉"):
        self.title = title
        self.emoji = emoji
        self.summary_lines: List[str] = []

    def add_header(self, problem: str, status: str):
        """Title line with the problem kind and the overall status"""
        self.summary_lines.append(f"## {self.emoji} {self.title}\n\n")
        self.summary_lines.append(f"`{problem}` instance, {status}\n\n")

    def add_table(self, headers: Sequence[str], rows: Sequence[Sequence[Any]]):
        """Add a Markdown table"""
        self.summary_lines.append("| " + " | ".join(headers) + " |\n")
        self.summary_lines.append("|" + "---|" * len(headers) + "\n")
        for row in rows:
            self.summary_lines.append("| " + " | ".join(str(c) for c in row) + " |\n")
        self.summary_lines.append("\n")

    def add_solver_status(self, outcomes: Sequence[Tuple[str, bool, str, float]]):
        """One row per ``(solver, ok, stop_reason, wall_ms)``"""
        rows = [[("✓ " if ok else "✗ ") + name, reason, f"{wall_ms:.1f}"] for name, ok, reason, wall_ms in outcomes]
        self.add_table(["solver", "stop reason", "wall ms"], rows)

    def add_footer(self, tracker: ExecutionTracker):
        """Finish time and total duration"""
        stamp = tracker.end_timestamp or datetime.now(timezone.utc)
        self.summary_lines.append(
            f"Finished {stamp.strftime('%Y-%m-%d %H:%M:%S')} UTC in {tracker.get_duration():.2f}s\n\n"
        )

    def write(self, summary_file: Optional[str] = None) -> bool:
        """Append the summary to ``summary_file`` or ``$GITHUB_STEP_SUMMARY``"""
        summary_file = summary_file or os.environ.get('GITHUB_STEP_SUMMARY')
        if not summary_file:
            return False
        with open(summary_file, 'a') as f:
            f.writelines(self.summary_lines)
        print("✓ Wrote run summary")
        return True


def save_json(output_file: str, data: Dict[str, Any]):
    """Save a JSON document with sorted keys so reruns are byte-identical"""
    directory = os.path.dirname(output_file)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(output_file, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def format_real(value: Optional[float]) -> str:
    """Render a real with 17 significant digits; ``None`` becomes an empty cell"""
    if value is None:
        return ""
    return f"{float(value):.17g}"
