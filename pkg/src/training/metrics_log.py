from __future__ import annotations
import os
import json
import math
from typing import Any, TYPE_CHECKING

if TYPE_CHECKING:
    from typing_extensions import Self

import pandas as pd


FIELDS = ('step', 'loss', 'loss_color', 'loss_tv', 'lr_factor', 'psnr')


def _encode(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


class MetricsLogger:
    """Newline-delimited JSON metrics, one record per logged step."""

    def __init__(self, output_path: str, append: bool=False):
        os.makedirs(os.path.dirname(os.path.abspath(output_path)),
                    exist_ok=True)
        self.path = output_path
        self.out = open(output_path, 'a' if append else 'w')

    def close(self):
        if self.out is not None:
            self.out.close()
            self.out = None

    def __exit__(self, *args):
        self.close()

    def __enter__(self) -> Self:
        return self

    def log(self, **record: Any) -> None:
        print(json.dumps({key: _encode(value)
                          for key, value in record.items()}),
              file=self.out, flush=True)

    def log_step(self,
                 step: int,
                 loss: float,
                 loss_color: float,
                 loss_tv: float,
                 lr_factor: float,
                 psnr: float) -> None:
        self.log(step=step, loss=loss, loss_color=loss_color,
                 loss_tv=loss_tv, lr_factor=lr_factor, psnr=psnr)

    def log_validation(self, step: int, psnr: float, frame: str) -> None:
        self.log(step=step, kind='validation', psnr=psnr, frame=frame)


def read_metrics_log(path: str) -> pd.DataFrame:
    """The log as a DataFrame; "inf" sentinels come back as floats."""

    records = []
    with open(path, 'r') as fp:
        for line in fp:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    frame = pd.DataFrame.from_records(records)
    if 'psnr' in frame:
        frame['psnr'] = pd.to_numeric(frame['psnr'].replace(
            {'inf': math.inf, '-inf': -math.inf}))
    return frame
