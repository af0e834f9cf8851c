"""
PolLidar命令行入口

子命令：scene、simulate、reconstruct、materials、eval、schedule、diagnostics。
退出码：0成功，1运行失败，2配置或模式错误。
"""

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.pipeline import Pipeline
from pollidar.io import loader, saver
from pollidar.operators.evaluate.metrics import evaluate
from pollidar.operators.material.fit import MaterialFitConfig, estimate_materials, normal_noise_sweep
from pollidar.operators.preprocess.ellipsometry import EllipsometryOperator, polarization_diagnostics
from pollidar.operators.preprocess.slicing import SlicePeaksOperator
from pollidar.operators.reconstruct.features import FEATURE_MODES, export_features
from pollidar.operators.reconstruct.maps import NormalEstimate, ReconMaps
from pollidar.operators.reconstruct.modelfit import ModelFitOperator, ModelFitSettings
from pollidar.operators.reconstruct.pca import PCAOperator
from pollidar.operators.reconstruct.sfp import SfPOperator
from pollidar.operators.reconstruct.tof import ToFOperator
from pollidar.operators.simulate.noise import NOISE_PROFILES, NoiseOperator, noise_from_profile
from pollidar.operators.simulate.render import RenderOperator
from pollidar.operators.simulate.schedule import schedule_from_config
from pollidar.optics.materials import MaterialDB
from pollidar.scene.generator import TEMPLATES, generate_scene
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.config import Config
from pollidar.utils.logger import configure_logging, get_logger
from pollidar.utils.manifest import RunManifest
from pollidar.utils.operator_utils import configure_operator_io

logger = get_logger(__name__)

METHODS = ("argmax", "parabolic", "sfp", "pca", "modelfit")
EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _threads(args, config: Config) -> int:
    if args.threads is not None:
        return max(1, int(args.threads))
    return max(1, int(config.get("threads", 1)))


def _out_dir(path: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return directory


def cmd_scene(args, config: Config) -> int:
    """生成程序化场景JSON"""
    sensor = SensorConfig.from_config(config)
    scene = generate_scene(args.seed, args.template, sensor=sensor)
    out_dir = _out_dir(args.out)
    saver.save_scene(scene, args.out)
    manifest = RunManifest.start("scene", [args.config], {"scene": args.seed})
    manifest.add_output(args.out, out_dir)
    manifest.finish(out_dir)
    logger.info(f"wrote {args.template} scene with {len(scene.primitives)} primitives to {args.out}")
    return EXIT_OK


def cmd_simulate(args, config: Config) -> int:
    """
    渲染场景并写出PWF1立方体与真值栅格

    立方体直接渲染进文件memmap，噪声在原地施加。
    """
    threads = _threads(args, config)
    scene = loader.load_scene(args.scene, mesh_support=bool(config.get("scene.mesh_support", True)))
    sensor = scene.sensor or SensorConfig.from_config(config)
    schedule = schedule_from_config(config, args.states)
    params = noise_from_profile(args.noise, config)
    render = config.section("render")
    out_dir = _out_dir(args.out)

    pipeline = Pipeline([
        RenderOperator(schedule, sensor, float(render.get("adc_gain", 1.0e7)), threads,
                       out_factory=lambda shape, s, sch: saver.create_cube_file(args.out, sch, s)),
        NoiseOperator(params, args.seed, args.laser_power, threads, in_place=True),
    ])
    frame = pipeline.process({"scene": scene})
    saver.finish_cube_file(args.out, frame["cube"])
    gt_paths = saver.save_scene_maps(frame["scene_maps"], os.path.join(out_dir, args.gt_dir))

    manifest = RunManifest.start("simulate", [args.config], {"noise": args.seed, "jitter": sensor.jitter_seed})
    manifest.add_input(args.scene)
    for path in [args.out, saver.sidecar_path(args.out)] + sorted(gt_paths.values()):
        manifest.add_output(path, out_dir)
    manifest.finish(out_dir)
    return EXIT_OK


def _prior_normals(frame) -> Optional[np.ndarray]:
    prior = frame.get("prior_normals")
    return None if prior is None else prior.normal


def run_reconstruction(cube, method: str, config: Config, threads: int, eta: Optional[float] = None):
    """
    对立方体运行预处理与指定的重建方法

    Returns:
        tuple: (ReconMaps, 帧)

    Raises:
        ConfigurationError: 未知方法或方法与数据不兼容
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method '{method}', expected one of {METHODS}")
    section = config.section("reconstruct")
    operators = [
        SlicePeaksOperator(int(config.get("preprocess.window", 51))),
        ToFOperator("none" if method == "argmax" else "parabolic"),
    ]
    k, r_max = int(section.get("pca_k", 16)), float(section.get("pca_r_max", 2.0))
    if method in ("sfp", "modelfit"):
        operators.append(EllipsometryOperator(threads))
        operators.append(PCAOperator(k, r_max, key="prior_normals"))
    if method == "sfp":
        operators.append(SfPOperator(float(eta if eta is not None else section.get("eta_assumed", 1.5)),
                                     float(section.get("dop_floor", 0.01)), section.get("illumination", "laser")))
    elif method == "pca":
        operators.append(PCAOperator(k, r_max))
    elif method == "modelfit":
        operators.append(ModelFitOperator(ModelFitSettings.from_config(config), threads))

    frame = Pipeline(operators).process({"cube": cube, "sensor": cube.sensor})
    distance = frame["distance"]
    if method == "modelfit":
        recon = frame["recon"]
    elif method in ("sfp", "pca"):
        recon = ReconMaps.from_estimates(distance, frame["normals"], method)
    else:
        empty = NormalEstimate(np.zeros(cube.sensor.shape + (3,)), distance.confidence)
        recon = ReconMaps.from_estimates(distance, empty, method)
    return recon, frame


def cmd_reconstruct(args, config: Config) -> int:
    """重建距离与法线，可选导出特征张量、Mueller电影与评估指标"""
    threads = _threads(args, config)
    cube = loader.load_cube(args.cube)
    recon, frame = run_reconstruction(cube, args.method, config, threads, args.eta)
    os.makedirs(args.out, exist_ok=True)
    parameters = {"method": args.method, "eta": args.eta, "reconstruct": config.section("reconstruct")}
    outputs = list(saver.save_recon(recon, args.out, parameters).values())

    if args.export_features or args.save_mueller:
        movie = frame.get("movie")
        if movie is None and (args.save_mueller or args.export_features != "no_mueller"):
            frame = Pipeline([EllipsometryOperator(threads)]).process(frame)
            movie = frame["movie"]
        if args.export_features:
            path = os.path.join(args.out, "features.pfx")
            saver.save_features(export_features(frame["sliced"], movie, args.export_features), path)
            outputs.append(path)
        if args.save_mueller:
            path = os.path.join(args.out, "mueller.pmm")
            saver.save_mueller(movie, path)
            outputs.append(path)

    if args.gt:
        truth = loader.load_scene_maps(args.gt)
        mask = truth.confidence.astype(bool) & recon.confidence.astype(bool)
        normal_pair = (recon.normal, truth.normal) if args.method not in ("argmax", "parabolic") else (None, None)
        report = evaluate(normal_pair[0], normal_pair[1], recon.distance, truth.distance, mask)
        path = os.path.join(args.out, "metrics.json")
        saver.save_metrics(report, path)
        outputs.append(path)

    manifest = RunManifest.start("reconstruct", [args.config])
    manifest.add_input(args.cube)
    for path in sorted(outputs) + sorted(saver.sidecar_path(p) for p in outputs if p.endswith(".pfm")):
        manifest.add_output(path, args.out)
    manifest.finish(args.out)
    return EXIT_OK


def cmd_materials(args, config: Config) -> int:
    """在给定法线与距离下估计材质"""
    threads = _threads(args, config)
    cube = loader.load_cube(args.cube)
    frame = Pipeline([
        SlicePeaksOperator(int(config.get("preprocess.window", 51))),
        EllipsometryOperator(threads),
    ]).process({"cube": cube})
    movie = frame["movie"]
    geometry = loader.load_recon(args.normals)
    cfg = MaterialFitConfig.from_config(config)
    mask = geometry.confidence.astype(bool)

    truth = loader.load_scene_maps(args.gt) if args.gt else None
    segments = truth.material_id if truth is not None else None
    if args.mode == "segment" and segments is None:
        raise ConfigurationError("segment mode needs --gt with a material_id raster")
    result = estimate_materials(movie, geometry.normal, geometry.distance, cfg, mask=mask,
                                segments=segments, mode=args.mode, threads=threads)
    os.makedirs(args.out, exist_ok=True)
    outputs = list(saver.save_material_maps(result, args.out, {"mode": args.mode}).values())

    if args.normal_noise_deg:
        if truth is None:
            raise ConfigurationError("--normal-noise-deg needs --gt for the true refractive index")
        db = MaterialDB.from_file(args.materials) if args.materials else MaterialDB.default()
        ids = np.where(truth.material_id >= 0, truth.material_id, db.ids()[0])
        eta_true = db.gather(ids).eta
        rows = normal_noise_sweep(movie, geometry.normal, geometry.distance, eta_true, args.normal_noise_deg,
                                  cfg, mask=mask & truth.confidence.astype(bool), seed=args.seed, threads=threads)
        path = os.path.join(args.out, "normal_noise_sweep.csv")
        with open(path, 'w', encoding='utf-8') as f:
            f.write("normal_noise_deg,eta_mae,pixels\n")
            for row in rows:
                f.write(f"{row['normal_noise_deg']:g},{row['eta_mae']:.6g},{row['pixels']}\n")
        outputs.append(path)

    manifest = RunManifest.start("materials", [args.config], {"normal_noise": args.seed})
    manifest.add_input(args.cube)
    for path in sorted(outputs) + sorted(saver.sidecar_path(p) for p in outputs if p.endswith(".pfm")):
        manifest.add_output(path, args.out)
    manifest.finish(args.out)
    return EXIT_OK


def cmd_eval(args, config: Config) -> int:
    """比较重建目录与真值目录"""
    pred = loader.load_recon(args.pred)
    truth = loader.load_scene_maps(args.gt)
    if pred.distance.shape != truth.distance.shape:
        raise ConfigurationError(f"prediction {pred.distance.shape} and ground truth {truth.distance.shape} "
                                 f"have different dimensions")
    mask = truth.confidence.astype(bool) & pred.confidence.astype(bool)
    has_normals = bool(np.any(np.linalg.norm(pred.normal, axis=-1) > 0))
    report = evaluate(pred.normal if has_normals else None, truth.normal if has_normals else None,
                      pred.distance, truth.distance, mask)
    out_dir = _out_dir(args.out)
    saver.save_metrics(report, args.out, args.csv)
    manifest = RunManifest.start("eval", [args.config])
    manifest.add_output(args.out, out_dir)
    manifest.finish(out_dir)
    print(report.csv_header())
    print(report.csv_row())
    return EXIT_OK


def cmd_schedule(args, config: Config) -> int:
    """打印调度的秩与条件数；秩不足16时返回2"""
    schedule = schedule_from_config(config, args.states, verify=not args.check)
    rank, cond = schedule.conditioning()
    print(f"states={schedule.size} rank={rank} condition={cond:.6g}")
    if rank < 16:
        logger.error(f"schedule design matrix is rank deficient ({rank} < 16)")
        return EXIT_CONFIG
    return EXIT_OK


def cmd_diagnostics(args, config: Config) -> int:
    """写出偏振态0的强度栅格与峰值bin的DoP/AoP栅格"""
    threads = _threads(args, config)
    cube = loader.load_cube(args.cube)
    frame = Pipeline([
        SlicePeaksOperator(int(config.get("preprocess.window", 51))),
        EllipsometryOperator(threads),
    ]).process({"cube": cube})
    rasters = polarization_diagnostics(frame["movie"])
    rasters["intensity_state0"] = np.asarray(cube.data[0], dtype=np.float64).max(axis=-1)
    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest.start("diagnostics", [args.config])
    manifest.add_input(args.cube)
    for name in sorted(rasters):
        path = os.path.join(args.out, f"{name}.pfm")
        saver.save_raster(path, rasters[name], {"field": name, "source": os.path.basename(args.cube)})
        manifest.add_output(path, args.out)
        manifest.add_output(saver.sidecar_path(path), args.out)
    manifest.finish(args.out)
    return EXIT_OK


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pollidar", description="Polarimetric wavefront lidar toolkit")
    parser.add_argument("--config", default=None, help="JSON配置文件")
    parser.add_argument("--log-level", default=None, help="日志级别，默认取配置中的log_level")
    parser.add_argument("--log-file", default=None, help="同时写入该日志文件")
    parser.add_argument("--threads", type=int, default=None, help="按行并行的线程数（默认POLLIDAR_THREADS或1）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scene", help="生成程序化场景")
    p.add_argument("--template", choices=TEMPLATES, default="road")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_scene)

    p = sub.add_parser("simulate", help="渲染波前立方体")
    p.add_argument("scene")
    p.add_argument("--out", required=True, help="PWF1立方体路径")
    p.add_argument("--noise", choices=sorted(NOISE_PROFILES), default="default")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--laser-power", type=float, default=1.0)
    p.add_argument("--states", type=int, default=None)
    p.add_argument("--gt-dir", default="gt", help="真值栅格目录（相对立方体所在目录）")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("reconstruct", help="重建距离与法线")
    p.add_argument("cube")
    p.add_argument("--method", choices=METHODS, default="parabolic")
    p.add_argument("--out", required=True)
    p.add_argument("--eta", type=float, default=None, help="SfP假设的折射率")
    p.add_argument("--export-features", choices=FEATURE_MODES, default=None)
    p.add_argument("--save-mueller", action="store_true")
    p.add_argument("--gt", default=None, help="真值目录，提供时写出metrics.json")
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("materials", help="固定法线下的材质估计")
    p.add_argument("cube")
    p.add_argument("--normals", required=True, help="含distance/normal栅格的目录")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("pixel", "segment"), default="pixel")
    p.add_argument("--gt", default=None, help="真值目录（分割与η真值）")
    p.add_argument("--materials", default=None, help="材质库JSON，用于η真值")
    p.add_argument("--normal-noise-deg", type=_float_list, default=None, help="例如0,2,5,10")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_materials)

    p = sub.add_parser("eval", help="评估重建结果")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--out", required=True, help="metrics.json路径")
    p.add_argument("--csv", default=None, help="追加一行到该CSV")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("schedule", help="检查采集调度")
    p.add_argument("--check", action="store_true", help="不做满秩校验地构建调度，只报告秩与条件数")
    p.add_argument("--states", type=int, default=None)
    p.set_defaults(handler=cmd_schedule)

    p = sub.add_parser("diagnostics", help="写出诊断栅格")
    p.add_argument("cube")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_diagnostics)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = Config(args.config)
        configure_logging(args.log_level or config.get("log_level", "INFO"), log_file=args.log_file)
        configure_operator_io(config)
        return args.handler(args, config)
    except ConfigurationError as e:
        logger.error(str(e))
        logger.debug(f"{args.command} traceback", exc_info=True)
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(f"{args.command} traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
