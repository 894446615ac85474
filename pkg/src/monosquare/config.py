"""运行配置"""

import os
from dataclasses import dataclass, fields
from typing import Dict, Any

from dotenv import load_dotenv


@dataclass
class MonoSquareConfig:
    """工具包配置类"""

    jobs: int = 1

    # 扫描分块：从小块开始，逐步翻倍
    scan_chunk_min: int = 256
    scan_chunk_max: int = 1 << 16

    oracle_max_domain: int = 1 << 28
    threshold_max_M: int = 1 << 20
    bitmap_max_domain: int = 1 << 26

    # 并行回溯时按前 split_depth 个元素划分搜索树
    split_depth: int = 6

    monotone_sample: int = 1000
    audit_monotonicity: bool = False

    log_level: str = "INFO"

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError(f"jobs 必须 ≥ 1，当前为 {self.jobs}")
        if not 1 <= self.scan_chunk_min <= self.scan_chunk_max:
            raise ValueError("scan_chunk_min 必须在 [1, scan_chunk_max] 内")

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]):
        """从字典创建配置对象"""
        return cls(**config_dict)

    @classmethod
    def from_env(cls, **overrides):
        """读取 .env 与环境变量（MONO_SQUARE_JOBS）"""
        load_dotenv()
        values: Dict[str, Any] = {}
        jobs = os.getenv("MONO_SQUARE_JOBS")
        if jobs:
            values["jobs"] = int(jobs)
        values.update(overrides)
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典"""
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_CONFIG = MonoSquareConfig()
