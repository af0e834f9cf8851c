"""
椭偏采集调度

第i个偏振态的发射调制 P_i = Q(θ²)·W(θ¹)，接收调制 A_i = L(θ⁴)·Q(θ³)，
测得强度 I_i = [A_i·H·P_i·s_laser]_0。把H按行展开为16维向量h（h[4r+c] = H[r, c]），
每个偏振态给出设计矩阵的一行 kron(row₀(A_i), P_i·s_laser)。
"""

import dataclasses
from typing import List, Optional, Sequence, Tuple

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.optics import polmath
from pollidar.optics.polmath import OpticAngles
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

HORIZONTAL_LASER = (1.0, 1.0, 0.0, 0.0)


@dataclasses.dataclass
class AngleSchedule:
    """
    偏振态调度

    Attributes:
        entries: 每个偏振态的元件角度
        laser_stokes: 激光的Stokes向量，默认水平线偏振
    """

    entries: List[OpticAngles]
    laser_stokes: np.ndarray = dataclasses.field(default_factory=lambda: np.array(HORIZONTAL_LASER))

    def __post_init__(self):
        self.laser_stokes = np.asarray(self.laser_stokes, dtype=float).reshape(4)
        if not polmath.is_physical(self.laser_stokes) or self.laser_stokes[0] <= 0:
            raise ConfigurationError(f"laser Stokes vector {self.laser_stokes.tolist()} is not physical")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    def angles(self) -> np.ndarray:
        """(S, 4) 弧度"""
        return np.array([e.as_array() for e in self.entries]).reshape(-1, 4)

    def generator_matrices(self) -> np.ndarray:
        a = self.angles()
        return polmath.quarter_waveplate(a[:, 1]) @ polmath.half_waveplate(a[:, 0])

    def analyzer_matrices(self) -> np.ndarray:
        a = self.angles()
        return polmath.linear_polarizer(a[:, 3]) @ polmath.quarter_waveplate(a[:, 2])

    def illumination(self, laser_stokes=None) -> np.ndarray:
        """每个偏振态照射到场景的Stokes向量 P_i·s_laser，(S, 4)"""
        s = self.laser_stokes if laser_stokes is None else np.asarray(laser_stokes, dtype=float)
        return self.generator_matrices() @ s

    def analyzer_rows(self) -> np.ndarray:
        """接收端Mueller矩阵的第0行，(S, 4)"""
        return self.analyzer_matrices()[:, 0, :]

    def design_matrix(self) -> np.ndarray:
        """(S, 16) 设计矩阵"""
        rows = self.analyzer_rows()
        ill = self.illumination()
        return (rows[:, :, None] * ill[:, None, :]).reshape(self.size, 16)

    def measure(self, h) -> np.ndarray:
        """
        正向模型：Mueller矩阵 → 各偏振态强度

        Args:
            h: (..., 4, 4)

        Returns:
            numpy.ndarray: (..., S)
        """
        return np.einsum("si,...ij,sj->...s", self.analyzer_rows(), np.asarray(h), self.illumination())

    def conditioning(self) -> Tuple[int, float]:
        """
        设计矩阵的秩与条件数

        Returns:
            tuple: (rank, condition number)，秩不足16时条件数为inf
        """
        if self.size == 0:
            return 0, float("inf")
        singular = np.linalg.svd(self.design_matrix(), compute_uv=False)
        tol = singular[0] * max(self.design_matrix().shape) * np.finfo(float).eps
        rank = int(np.sum(singular > tol))
        cond = float(singular[0] / singular[-1]) if rank == 16 else float("inf")
        return rank, cond

    def check(self) -> Tuple[int, float]:
        """
        校验调度可以恢复完整的Mueller矩阵

        Raises:
            ConfigurationError: 秩小于16
        """
        rank, cond = self.conditioning()
        if rank < 16:
            raise ConfigurationError(f"schedule design matrix has rank {rank} < 16; "
                                     f"{self.size} states cannot recover a full Mueller matrix")
        logger.debug(f"schedule with {self.size} states: rank {rank}, condition number {cond:.3f}")
        return rank, cond

    def to_dict(self):
        return {"angles_rad": self.angles().tolist(), "laser_stokes": self.laser_stokes.tolist()}

    @classmethod
    def from_array(cls, angles, laser_stokes=HORIZONTAL_LASER) -> "AngleSchedule":
        return cls([OpticAngles(*row) for row in np.asarray(angles, dtype=float).reshape(-1, 4)],
                   np.asarray(laser_stokes, dtype=float))


def default_schedule(states: int = 36, hwp_deg: float = 0.0, qwp_emit_step_deg: float = 5.0,
                     qwp_recv_step_deg: float = 25.0, lp_deg: float = 0.0,
                     laser_stokes: Sequence[float] = HORIZONTAL_LASER, verify: bool = True) -> AngleSchedule:
    """
    双旋转延迟器调度：θ¹、θ⁴固定，θ²_k = k·Δ₂，θ³_k = k·Δ₃

    默认Δ₂ = 5°、Δ₃ = 25°（1:5转速比）。QWP的Mueller矩阵以180°为周期，
    36个偏振态在该步长下互不重复，设计矩阵满秩且条件数约为13。

    Args:
        states (int): 偏振态个数
        hwp_deg (float): 发射端HWP角度
        qwp_emit_step_deg (float): 发射端QWP步长
        qwp_recv_step_deg (float): 接收端QWP步长
        lp_deg (float): 接收端LP角度
        laser_stokes: 激光Stokes向量
        verify (bool): 是否在构造时校验满秩

    Returns:
        AngleSchedule: 调度

    Raises:
        ConfigurationError: verify为True且秩不足16
    """
    k = np.arange(states)
    entries = [OpticAngles.from_degrees(hwp_deg, i * qwp_emit_step_deg, i * qwp_recv_step_deg, lp_deg) for i in k]
    schedule = AngleSchedule(entries, np.asarray(laser_stokes, dtype=float))
    if verify:
        schedule.check()
    return schedule


def schedule_from_config(config, states: Optional[int] = None, verify: bool = True) -> AngleSchedule:
    """从Config的schedule节构建默认调度；verify=False时允许秩亏的调度"""
    section = config.section("schedule")
    return default_schedule(states=int(states or section.get("states", 36)),
                            hwp_deg=float(section.get("hwp_deg", 0.0)),
                            qwp_emit_step_deg=float(section.get("qwp_emit_step_deg", 5.0)),
                            qwp_recv_step_deg=float(section.get("qwp_recv_step_deg", 25.0)),
                            lp_deg=float(section.get("lp_deg", 0.0)),
                            laser_stokes=section.get("laser_stokes", HORIZONTAL_LASER), verify=verify)
