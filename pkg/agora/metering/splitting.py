"""
Revenue splitting through share trees
Amounts flow top-down; every sibling group is apportioned exactly, so the
leaves always receive the gross to the micro-unit.
"""

from collections import defaultdict
from typing import Dict, List, Tuple

from agora.assets.validation import share_tree_problems
from agora.errors import InvalidShareTree
from agora.models.assets import RevenueShareTree
from agora.models.money import Money, apportion


def split_payment(gross: Money, tree: RevenueShareTree) -> List[Tuple[str, Money]]:
    """(beneficiary, amount) per leaf in tree order; raises InvalidShareTree."""
    problems = share_tree_problems(tree)
    if problems:
        raise InvalidShareTree([f"{field}: {rule}" for field, rule in problems])
    if gross.micro_units < 0:
        raise ValueError("gross must be non-negative")

    out: List[Tuple[str, Money]] = []

    def descend(node: RevenueShareTree, amount: int) -> None:
        if not node.children:
            out.append((node.beneficiary, Money.micro(amount)))
            return
        parts = apportion(amount, [c.share for c in node.children])
        for child, part in zip(node.children, parts):
            descend(child, part)

    descend(tree, gross.micro_units)
    return out


def credits_by_beneficiary(splits: List[Tuple[str, Money]]) -> Dict[str, Money]:
    credits: Dict[str, Money] = defaultdict(Money.zero)
    for beneficiary, amount in splits:
        credits[beneficiary] = credits[beneficiary] + amount
    return dict(credits)
