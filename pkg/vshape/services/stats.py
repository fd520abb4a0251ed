"""
Runtime 상태 텍스트 덤프 (shape 레지스트리, 규칙 테이블, history)
- 출력 순서는 결정적: shape는 생성 순서, 테이블 행은 키 순서
"""
from typing import List

from .tables import Runtime, format_key


def dump_stats(rt: Runtime) -> str:
    lines: List[str] = [
        f"mode: {rt.mode.value}",
        f"sealed: {'yes' if rt.sealed else 'no'}",
        "",
        f"shapes ({rt.shapes_created})",
    ]
    for shape in rt.registry:
        lines.append(
            f"  {shape.label()}  {shape.cls}  width={shape.width} depth={shape.depth}  {shape.structure()}"
        )

    lines += ["", f"rules ({len(rt.rules)})"]
    for key, target in rt.rules.rows():
        seeded = " [seeded]" if rt.rules.is_seeded(key) else ""
        lines.append(f"  {format_key(key)} -> {target.label()}{seeded}")

    lines += ["", f"history ({len(rt.history)})"]
    for key, count, frozen in rt.history.rows():
        lines.append(f"  {format_key(key)} = {count}{' [frozen]' if frozen else ''}")

    counters = rt.counters
    lines += [
        "",
        "counters",
        f"  objects_allocated={counters.objects_allocated}",
        f"  slots_allocated={counters.slots_allocated}",
        f"  reifications={counters.reifications}",
        f"  constructions={counters.constructions}",
        f"  restarts={counters.restarts}",
        f"  field_reads={counters.field_reads}",
    ]

    live = [shape for shape in rt.registry if rt.constructed[shape] or rt.donated[shape]]
    lines += ["", "instances"]
    for shape in live:
        lines.append(
            f"  {shape.label()}  constructed={rt.constructed[shape]} donated={rt.donated[shape]}"
        )
    return "\n".join(lines) + "\n"
