from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union
import logging
import sys

import pandas as pd

logger = logging.getLogger(__name__)

# %g switches to scientific notation below 1e-4
FLOAT_FORMAT = "%.10g"


class ResultWriter:
    """Writes command records as CSV or JSON to a file or a stream."""

    def frame(self, records: Sequence[Dict[str, Any]]) -> pd.DataFrame:
        """Records as a DataFrame with first-seen column order."""
        columns: List[str] = []
        for record in records:
            for key in record:
                if key not in columns:
                    columns.append(key)
        return pd.DataFrame(list(records), columns=columns)

    def render(self, records: Sequence[Dict[str, Any]], fmt: str = "csv") -> str:
        df = self.frame(records)
        if fmt == "csv":
            return df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        if fmt == "json":
            return df.to_json(orient="records", double_precision=10, indent=2) + "\n"
        raise ValueError(f"Unknown output format: {fmt}")

    def write(
        self,
        records: Sequence[Dict[str, Any]],
        fmt: str = "csv",
        output: Optional[Union[str, Path]] = None,
        stream: Optional[TextIO] = None,
    ) -> str:
        """Render ``records`` and write them to ``output`` (a path) or ``stream`` (stdout by default)."""
        text = self.render(records, fmt)
        if output:
            path = Path(output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            logger.info(f"Wrote {len(records)} records to {path}")
        else:
            (stream or sys.stdout).write(text)
        return text
