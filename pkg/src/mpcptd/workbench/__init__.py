"""Instance files, synthetic generation and the benchmark harness."""
from .bench import BENCH_COLUMNS, BenchCell, BenchReport, BenchRow, run_bench
from .generator import DEFAULT_PEAKS, GeneratorConfig, Peak, day_shift_config, generate_instance, parse_peaks
from .instance import SCHEMA_VERSION, instance_from_dict, instance_to_dict, read_instance, write_instance

__all__ = [
    "BENCH_COLUMNS",
    "BenchCell",
    "BenchReport",
    "BenchRow",
    "DEFAULT_PEAKS",
    "GeneratorConfig",
    "Peak",
    "SCHEMA_VERSION",
    "day_shift_config",
    "generate_instance",
    "instance_from_dict",
    "instance_to_dict",
    "parse_peaks",
    "read_instance",
    "run_bench",
    "write_instance",
]
