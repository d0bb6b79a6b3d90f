"""Times the decoders over one sampled community, the way the experiment runners call them"""
import gt_core
from gt_core.decoders import LbpConfig, comp, community_comp, lbp_decode
from gt_core.designs import (
    BlockDesignSpec,
    OnePerFamily,
    community_g1,
    community_g2,
    constant_column_weight_matrix,
)
from gt_core.directives import Timer
from gt_core.model import CommunityStructure, Probabilistic, Seed

FAMILIES, FAMILY_SIZE, Q, P, TESTS = 200, 50, 0.05, 0.5, 2000
REPEAT = 10

structure = CommunityStructure([FAMILY_SIZE] * FAMILIES)
seed = Seed(0, 0)
state = Probabilistic(Q, P).sample(structure, seed.generator(0))
pools = constant_column_weight_matrix(TESTS, structure.members, 10, seed.generator(1))
outcomes = gt_core.channel.run_matrix(pools, state)

g1 = community_g1(structure, OnePerFamily(), 1, seed.generator(2))
g2 = community_g2(structure, BlockDesignSpec.balanced(FAMILIES, 20), seed.generator(3))
outcomes1 = gt_core.channel.run_matrix(g1, state)
outcomes2 = gt_core.channel.run_matrix(g2, state)


def timed(name, function):
    timer = Timer(REPEAT, round_to=4)
    for _ in range(REPEAT):
        function()
    print("{0} took {1}s per run".format(name, timer.per_trial()))


timed("comp", lambda: comp(pools, outcomes))
timed("community_comp", lambda: community_comp(g1, g2, outcomes1, outcomes2, structure))
timed("lbp", lambda: lbp_decode(pools, structure, LbpConfig(Q, P), outcomes))
timed(
    "lbp (no family layer)",
    lambda: lbp_decode(pools, structure, LbpConfig(Q, P, community_aware=False), outcomes),
)
