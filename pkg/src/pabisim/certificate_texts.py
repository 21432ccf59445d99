"""Shipped certificates for the positive claims of the corpus.

Every response here moves the defender onto exactly the attacker's
successor, so each decomposition is the identity pair.
"""

CERTIFICATES: dict[str, str] = {
    "sim-coarser/plain": """\
certificate plain
pair 0 s1:1/2,s2:1/2 t1:1/2,t2:1/2
pair 1 t1:1/2,t2:1/2 s1:1/2,s2:1/2
respond 0 a 0 : defender { t1: 1@0 t2: 1@1 } decompose { 1 * id }
respond 0 a 1 : defender { t1: 1@0 t2: 1@0 } decompose { 1 * id }
respond 0 b 0 : defender { t1: 1@0 t2: 1@0 } decompose { 1 * id }
respond 1 a 0 : defender { s1: 1@1 s2: 1@0 } decompose { 1 * id }
respond 1 a 1 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
respond 1 b 0 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
""",
    "trace-late-derived/late": """\
certificate late
pair 0 s1:1/2,s2:1/2 t1:1/2,t2:1/2
pair 1 t1:1/2,t2:1/2 s1:1/2,s2:1/2
respond 0 a 0 : defender { t1: 1@0 t2: 1@1 } decompose { 1 * id }
respond 0 a 1 : defender { t1: 1@0 t2: 1@0 } decompose { 1 * id }
respond 0 b 0 : defender { t1: 1@0 t2: 1@0 } decompose { 1 * id }
respond 1 a 0 : defender { s1: 1@1 s2: 1@0 } decompose { 1 * id }
respond 1 a 1 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
respond 1 b 0 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
""",
    "jan-late/dagger": """\
certificate dagger
pair 0 s1:1/3,s2:1/3,s3:1/3 t1:1/3,t2:1/3,t3:1/3
pair 1 t1:1/3,t2:1/3,t3:1/3 s1:1/3,s2:1/3,s3:1/3
respond 0 a 0 : defender { t1: 1@0 t2: 1@0 } decompose { 1 * id }
respond 0 b 0 : defender { t2: 1@0 t3: 1@0 } decompose { 1 * id }
respond 0 a,b 0 : defender { t1: 1@0 t2: 1@1 t3: 1@0 } decompose { 1 * id }
respond 0 a,b 1 : defender { t1: 1@0 t2: 1@0 t3: 1@0 } decompose { 1 * id }
respond 1 a 0 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
respond 1 b 0 : defender { s2: 1@0 s3: 1@0 } decompose { 1 * id }
respond 1 a,b 0 : defender { s1: 1@0 s2: 1@1 s3: 1@0 } decompose { 1 * id }
respond 1 a,b 1 : defender { s1: 1@0 s2: 1@0 s3: 1@0 } decompose { 1 * id }
""",
    "trace-late/late": """\
certificate late
pair 0 s1:1/2,s2:1/2 t0:1
pair 1 t0:1 s1:1/2,s2:1/2
respond 0 a 0 : defender { t0: 1@0 } decompose { 1 * id }
respond 0 b 0 : defender { t0: 1@0 } decompose { 1 * id }
respond 1 a 0 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
respond 1 b 0 : defender { s1: 1@0 s2: 1@0 } decompose { 1 * id }
""",
    "non-comp/distributed": """\
certificate distributed
sync a b c
pair 0 s0|r0:1 s5|r0:1/2,s6|r0:1/2
pair 1 s5|r0:1/2,s6|r0:1/2 s0|r0:1
respond 0 a 0 : defender { s5|r0: 1@0 s6|r0: 1@0 } decompose { 1 * id }
respond 0 a 1 : defender { s5|r0: 1@1 s6|r0: 1@1 } decompose { 1 * id }
respond 0 b 0 : defender { s5|r0: 1@0 s6|r0: 1@0 } decompose { 1 * id }
respond 0 c 0 : defender { s5|r0: 1@0 s6|r0: 1@0 } decompose { 1 * id }
respond 1 a 0 : defender { s0|r0: 1@0 } decompose { 1 * id }
respond 1 a 1 : defender { s0|r0: 1@1 } decompose { 1 * id }
respond 1 b 0 : defender { s0|r0: 1@0 } decompose { 1 * id }
respond 1 c 0 : defender { s0|r0: 1@0 } decompose { 1 * id }
""",
}
