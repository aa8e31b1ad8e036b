"""配对划分枚举"""

from typing import Iterator, List, Sequence, Tuple, TypeVar

T = TypeVar("T")


def pair_partitions(items: Sequence[T]) -> Iterator[List[Tuple[T, T]]]:
    """
    枚举给定序列的全部配对划分（完美匹配），每次取最小的未配对位置先配对

    序列中可以有重复元素：匹配按位置进行，重复标签产生的匹配分别计数。
    奇数长度时不产生任何匹配。
    """
    items = list(items)
    if not items:
        yield []
        return
    if len(items) % 2:
        return
    first = items[0]
    rest = items[1:]
    for idx, partner in enumerate(rest):
        remaining = rest[:idx] + rest[idx + 1:]
        for pairing in pair_partitions(remaining):
            yield [(first, partner)] + pairing


def double_factorial(n: int) -> int:
    """n!!，约定 (-1)!! = 0!! = 1"""
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result
