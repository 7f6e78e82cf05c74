"""Team bidding game: an n-member team against a single player over k rounds.

At round t both sides secretly bid for a prize of value t; each bid value can
be used exactly once per bidder.  The team's effective bid is the max or the
(exact rational) average of its members' bids.  The higher effective bid wins
the prize; equal bids tie the prize away.  At the end the single player wins
only with strictly greater total prize, otherwise the team wins; winner +1,
loser -1.  Players observe round outcomes but never the opposing bids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

__all__ = ["Mode", "RoundOutcome", "GoofConfig", "GoofState", "initial_goof_state",
           "legal_team_actions", "legal_single_actions", "goof_step", "infostate_key"]


class Mode(Enum):
    MAX = "max"
    AVERAGE = "average"


class RoundOutcome(Enum):
    TEAM = "team"
    SINGLE = "single"
    TIE = "tie"


@dataclass(frozen=True)
class GoofConfig:
    k: int
    n: int
    mode: Mode

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 ranks")
        if self.n < 1:
            raise ValueError("need at least 1 team member")


@dataclass(frozen=True)
class GoofState:
    round: int  # 1-based; round == k+1 means terminal
    team_remaining: tuple  # n tuples of sorted ints
    single_remaining: tuple
    team_prize: int
    single_prize: int
    outcomes: tuple  # RoundOutcome per completed round

    @property
    def terminal(self) -> bool:
        return len(self.single_remaining) == 0


def initial_goof_state(config: GoofConfig) -> GoofState:
    bids = tuple(range(1, config.k + 1))
    return GoofState(1, tuple(bids for _ in range(config.n)), bids, 0, 0, ())


def legal_team_actions(state: GoofState, config: GoofConfig) -> list:
    """Cartesian product of each member's remaining bids, lexicographic."""
    if state.terminal:
        raise ValueError("no legal actions in a terminal state")
    return list(itertools.product(*state.team_remaining))


def legal_single_actions(state: GoofState) -> list:
    if state.terminal:
        raise ValueError("no legal actions in a terminal state")
    return list(state.single_remaining)


def goof_step(state: GoofState, team_bids: tuple, single_bid: int, config: GoofConfig):
    """Play one round.  Returns (next_state, utilities) with utilities None
    until the final round, then (u_team, u_single).

    AVERAGE mode compares n * single_bid against sum(team_bids) so fractional
    means never touch floating point.
    """
    if state.terminal:
        raise ValueError("cannot step a terminal state")
    if len(team_bids) != config.n:
        raise ValueError("team bid tuple has wrong arity")
    for i, b in enumerate(team_bids):
        if b not in state.team_remaining[i]:
            raise ValueError(f"team member {i} reused or invalid bid {b}")
    if single_bid not in state.single_remaining:
        raise ValueError(f"single player reused or invalid bid {single_bid}")

    if config.mode is Mode.MAX:
        team_value, single_value = max(team_bids), single_bid
    else:
        team_value, single_value = sum(team_bids), single_bid * config.n

    prize = state.round
    if team_value > single_value:
        outcome = RoundOutcome.TEAM
        team_prize, single_prize = state.team_prize + prize, state.single_prize
    elif team_value < single_value:
        outcome = RoundOutcome.SINGLE
        team_prize, single_prize = state.team_prize, state.single_prize + prize
    else:
        outcome = RoundOutcome.TIE
        team_prize, single_prize = state.team_prize, state.single_prize

    new_team = tuple(
        tuple(b for b in rem if b != bid)
        for rem, bid in zip(state.team_remaining, team_bids)
    )
    new_single = tuple(b for b in state.single_remaining if b != single_bid)
    nxt = GoofState(state.round + 1, new_team, new_single, team_prize, single_prize,
                    state.outcomes + (outcome,))
    if state.round == config.k:
        u_single = 1.0 if single_prize > team_prize else -1.0
        return nxt, (-u_single, u_single)
    return nxt, None


def infostate_key(state: GoofState, player: str) -> tuple:
    """Canonical key for what `player` ('team' | 'single') can distinguish."""
    if player == "team":
        return (state.round, state.team_remaining, state.outcomes)
    if player == "single":
        return (state.round, state.single_remaining, state.outcomes)
    raise ValueError(f"unknown player {player!r}")
