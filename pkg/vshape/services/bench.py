"""
내장 마이크로 벤치마크
- append / filter / map / reverse: 1..n 정수로 된 Cons/Nil 리스트
- tree: 깊이 d의 완전 이진 트리(Node/3)를 만들고 전위 순회로 합산
- arith: 생성자 없는 합산 루프 (최적화가 없는 프로그램의 오버헤드 확인용)
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Tuple, Union

from ..exceptions import UnknownBenchmarkError
from ..models import BenchmarkName, Mode
from ..schemas import BenchReport, Config
from .lang import Program, parse
from .machine import Machine, prepare
from .shapes import ClassDescriptor
from .tables import Runtime
from .values import checksum, measure

logger = logging.getLogger(__name__)

# 리스트 길이 / 트리 깊이 기본값
DEFAULT_SIZES: Dict[BenchmarkName, int] = {
    BenchmarkName.APPEND: 100_000,
    BenchmarkName.FILTER: 100_000,
    BenchmarkName.MAP: 100_000,
    BenchmarkName.REVERSE: 100_000,
    BenchmarkName.TREE: 18,
    BenchmarkName.ARITH: 100_000,
}


def tree_depth_for(size: int) -> int:
    """노드 수 기준 크기를 tree 깊이로 (깊이 d 트리는 노드 2^d - 1개)"""
    return max(1, size.bit_length() - 1)


LIST_CLASS = ClassDescriptor("Cons", 2)
TREE_CLASS = ClassDescriptor("Node", 3)

# --- [벤치마크 프로그램 템플릿] ---

LIST_PRELUDE = """
; 1..n 리스트 (뒤에서부터 쌓는 꼬리 재귀)
(define (range-acc i acc)
  (if (< i 1) acc (range-acc (- i 1) (Cons i acc))))
(define (range n) (range-acc n (Nil)))
"""

PROGRAM_TEMPLATES: Dict[BenchmarkName, str] = {
    BenchmarkName.REVERSE: LIST_PRELUDE + """
(define (rev xs acc)
  (match xs
    ((Nil) acc)
    ((Cons h t) (rev t (Cons h acc)))))
(rev (range {size}) (Nil))
""",
    BenchmarkName.MAP: LIST_PRELUDE + """
(define (map f xs)
  (match xs
    ((Nil) (Nil))
    ((Cons h t) (Cons (f h) (map f t)))))
(map (lambda (x) (+ x 1)) (range {size}))
""",
    BenchmarkName.FILTER: LIST_PRELUDE + """
; 나눗셈이 없으므로 n 이하의 가장 큰 2의 거듭제곱(>= 2)을 빼서 홀짝 판정
(define (pow2-upto p n)
  (if (< n (* p 2)) p (pow2-upto (* p 2) n)))
(define (parity n)
  (if (< n 2) n (parity (- n (pow2-upto 2 n)))))
(define (even? n) (= (parity n) 0))
(define (filter p xs)
  (match xs
    ((Nil) (Nil))
    ((Cons h t) (if (p h) (Cons h (filter p t)) (filter p t)))))
(filter even? (range {size}))
""",
    BenchmarkName.APPEND: LIST_PRELUDE + """
(define (append xs ys)
  (match xs
    ((Nil) ys)
    ((Cons h t) (Cons h (append t ys)))))
(append (range {size}) (range {size}))
""",
    BenchmarkName.TREE: """
; 노드 i의 자식은 2i, 2i+1 (값은 1..2^d-1)
(define (make d i)
  (if (= d 0)
      (Leaf)
      (Node i (make (- d 1) (* i 2)) (make (- d 1) (+ (* i 2) 1)))))
(define (sum t)
  (match t
    ((Leaf) 0)
    ((Node v l r) (+ v (+ (sum l) (sum r))))))
(sum (make {size} 1))
""",
    BenchmarkName.ARITH: """
(define (sum-to n acc)
  (if (= n 0) acc (sum-to (- n 1) (+ acc n))))
(sum-to {size} 0)
""",
}

PRIMARY_CLASS: Dict[BenchmarkName, Optional[ClassDescriptor]] = {
    BenchmarkName.APPEND: LIST_CLASS,
    BenchmarkName.FILTER: LIST_CLASS,
    BenchmarkName.MAP: LIST_CLASS,
    BenchmarkName.REVERSE: LIST_CLASS,
    BenchmarkName.TREE: TREE_CLASS,
    BenchmarkName.ARITH: None,
}


def resolve_name(name: Union[str, BenchmarkName]) -> BenchmarkName:
    try:
        return BenchmarkName(name)
    except ValueError:
        known = ", ".join(b.value for b in BenchmarkName)
        raise UnknownBenchmarkError(f"알 수 없는 벤치마크: {name} (가능: {known})") from None


def benchmark_text(name: Union[str, BenchmarkName], size: int) -> str:
    """size(리스트 길이, tree는 깊이)를 채운 프로그램 소스"""
    return PROGRAM_TEMPLATES[resolve_name(name)].format(size=size)


def benchmark_source(name: Union[str, BenchmarkName], size: int) -> Program:
    return parse(benchmark_text(name, size))


# --- [분석] ---

def dominant_chunk_width(rt: Runtime, cls: ClassDescriptor) -> Optional[int]:
    """
    cls의 shape 중 살아남은 인스턴스가 가장 많은 shape의 width
    - 생성 횟수에서 다른 객체에 인라이닝된 횟수를 뺀 값으로 비교 (reify된 객체는 제외)
    - 동률이면 더 넓은 shape

    Returns:
        width, 해당 클래스 객체가 한 번도 생성되지 않았으면 None
    """
    best: Optional[Tuple[int, int]] = None
    for shape in rt.registry:
        if shape.cls != cls or not rt.constructed[shape]:
            continue
        candidate = (rt.constructed[shape] - rt.donated[shape], shape.width)
        if best is None or candidate > best:
            best = candidate
    return None if best is None else best[1]


# --- [실행] ---

def run_once(
    name: Union[str, BenchmarkName],
    size: int,
    config: Config,
    repeat: int = 0,
    step_limit: Optional[int] = None,
) -> Tuple[BenchReport, Runtime]:
    """
    새 Runtime에서 벤치마크를 1회 실행

    Returns:
        (결과 리포트, 실행에 쓴 Runtime)
    """
    benchmark = resolve_name(name)
    if size < 1:
        raise ValueError(f"size는 1 이상이어야 합니다: {size}")

    # 1. 파싱은 시간 측정 밖
    program = benchmark_source(benchmark, size)
    rt = Runtime(config)

    # 2. 검증 + 규칙 시드 + 실행
    started = time.perf_counter()
    machine = Machine(rt, prepare(rt, program), step_limit)
    result = machine.run()
    elapsed_ms = (time.perf_counter() - started) * 1000

    # 3. 결과 측정
    counters = rt.counters
    primary = PRIMARY_CLASS[benchmark]
    report = BenchReport(
        benchmark=benchmark.value,
        mode=config.mode,
        size=size,
        config=config,
        repeat=repeat,
        wall_time_ms=elapsed_ms,
        objects_allocated=counters.objects_allocated,
        slots_allocated=counters.slots_allocated,
        reifications=counters.reifications,
        shapes_created=rt.shapes_created,
        rules_created=rt.rules_created,
        retained=measure(result),
        result_checksum=checksum(result),
        steps=machine.steps,
        peak_depth=machine.peak_depth,
        dominant_width=dominant_chunk_width(rt, primary) if primary else None,
    )
    logger.info(
        f"{benchmark.value} size={size} mode={config.mode.value} repeat={repeat}: "
        f"{elapsed_ms:.1f}ms, 유지 셀 {report.retained.total_cells}"
    )
    return report, rt


def _run_repeat(args) -> BenchReport:
    name, size, config, repeat, step_limit = args
    report, _ = run_once(name, size, config, repeat, step_limit)
    return report


def run_benchmark(
    name: Union[str, BenchmarkName],
    size: int,
    mode: Optional[Mode] = None,
    config: Optional[Config] = None,
    repeats: int = 1,
    parallel: bool = False,
    step_limit: Optional[int] = None,
) -> List[BenchReport]:
    """
    벤치마크를 repeats번 반복 (반복마다 새 Runtime, 웜업 분리 없음)

    Args:
        mode: 지정하면 config의 mode를 덮어씀
        parallel: 반복을 프로세스 풀에서 동시에 실행 (Runtime끼리 공유하는 것이 없음)
    """
    config = config or Config()
    if mode is not None:
        config = config.model_copy(update={"mode": Mode(mode)})
    if repeats < 1:
        raise ValueError(f"repeats는 1 이상이어야 합니다: {repeats}")

    jobs = [(name, size, config, repeat, step_limit) for repeat in range(repeats)]
    if parallel and repeats > 1:
        with ProcessPoolExecutor() as pool:
            return list(pool.map(_run_repeat, jobs))
    return [_run_repeat(job) for job in jobs]


def sweep(
    name: Union[str, BenchmarkName],
    sizes: Iterable[int],
    config: Optional[Config] = None,
    repeats: int = 1,
    step_limit: Optional[int] = None,
) -> List[BenchReport]:
    """크기별로 none / manual / auto 세 모드를 모두 실행"""
    reports: List[BenchReport] = []
    for size in sizes:
        for mode in (Mode.NONE, Mode.MANUAL, Mode.AUTO):
            reports.extend(
                run_benchmark(name, size, mode=mode, config=config, repeats=repeats, step_limit=step_limit)
            )
    return reports
