"""
运行清单模块

每个输出目录包含且仅包含一个manifest.json，记录命令、配置、种子、
版本、输入输出文件的哈希与运行时长。
"""

import dataclasses
import datetime
import hashlib
import json
import os
import time
from typing import Any, Dict, List, Optional

MANIFEST_NAME = "manifest.json"


def file_digest(path: str, chunk_size: int = 1 << 20) -> str:
    """
    计算文件的sha256

    Args:
        path (str): 文件路径
        chunk_size (int): 读取块大小

    Returns:
        str: 十六进制摘要
    """
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            digest.update(chunk)
    return digest.hexdigest()


@dataclasses.dataclass
class RunManifest:
    """命令运行记录"""

    command: str
    config_paths: List[str] = dataclasses.field(default_factory=list)
    seeds: Dict[str, Any] = dataclasses.field(default_factory=dict)
    tool_version: str = ""
    inputs: Dict[str, str] = dataclasses.field(default_factory=dict)
    outputs: Dict[str, str] = dataclasses.field(default_factory=dict)
    wall_time_s: float = 0.0
    created_at: str = ""
    _started: float = dataclasses.field(default_factory=time.perf_counter, repr=False)

    @classmethod
    def start(cls, command: str, config_paths: Optional[List[str]] = None,
              seeds: Optional[Dict[str, Any]] = None) -> "RunManifest":
        """
        开始记录一次运行

        Args:
            command (str): 子命令名
            config_paths (list, optional): 使用的配置文件
            seeds (dict, optional): 随机种子

        Returns:
            RunManifest: 清单实例
        """
        from pollidar import __version__

        return cls(command=command,
                   config_paths=[p for p in (config_paths or []) if p],
                   seeds=dict(seeds or {}),
                   tool_version=__version__)

    def add_input(self, path: str) -> None:
        self.inputs[os.path.basename(path)] = file_digest(path)

    def add_output(self, path: str, root: Optional[str] = None) -> None:
        """
        记录输出文件的哈希

        Args:
            path (str): 输出文件
            root (str, optional): 输出目录，键为相对它的路径；默认只用文件名
        """
        key = os.path.relpath(path, root) if root else os.path.basename(path)
        self.outputs[key.replace(os.sep, "/")] = file_digest(path)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data.pop("_started")
        return data

    def finish(self, out_dir: str) -> str:
        """
        写入清单，已存在的清单会被替换

        Args:
            out_dir (str): 输出目录

        Returns:
            str: 清单文件路径
        """
        self.wall_time_s = round(time.perf_counter() - self._started, 3)
        self.created_at = datetime.datetime.now().isoformat(timespec="seconds")
        path = os.path.join(out_dir, MANIFEST_NAME)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        return path


def verify_manifest(out_dir: str) -> Dict[str, bool]:
    """
    校验输出目录中的文件哈希

    Args:
        out_dir (str): 输出目录

    Returns:
        dict: 文件名 → 哈希是否一致
    """
    with open(os.path.join(out_dir, MANIFEST_NAME), 'r', encoding='utf-8') as f:
        manifest = json.load(f)
    result = {}
    for name, digest in manifest.get("outputs", {}).items():
        path = os.path.join(out_dir, name)
        result[name] = os.path.exists(path) and file_digest(path) == digest
    return result
