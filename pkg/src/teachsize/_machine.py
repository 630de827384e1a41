"""Batch execution of many unfolded base programs on one framed input."""

from __future__ import annotations

import numpy as np
from numba import njit

# outputs longer than this do not fit the int64 key and are flagged with -1
MAX_KEY_BITS = 62


@njit(cache=True, nogil=True)
def run_batch(code, starts, ends, jumps, stream, budget, steps_out, keys_out):
    n = starts.shape[0]
    origin = budget + 1
    tape = np.zeros(2 * budget + 3, np.uint8)
    slen = stream.shape[0]
    for k in range(n):
        pc = starts[k]
        end = ends[k]
        head = origin
        lo = origin
        hi = origin
        pos = 0
        steps = 0
        key = np.int64(1)
        olen = 0
        halted = True
        while pc < end:
            if steps == budget:
                halted = False
                break
            op = code[pc]
            if op == 7:
                halted = False
                break
            steps += 1
            if op == 0:
                head += 1
                if head > hi:
                    hi = head
            elif op == 1:
                head -= 1
                if head < lo:
                    lo = head
            elif op == 2:
                tape[head] ^= 1
            elif op == 3:
                if olen < MAX_KEY_BITS:
                    key = (key << 1) | tape[head]
                olen += 1
            elif op == 4:
                if pos < slen:
                    tape[head] = stream[pos]
                    pos += 1
                else:
                    tape[head] = 0
            elif op == 5:
                if tape[head] == 0:
                    pc = jumps[pc] + 1
                    continue
            elif op == 6:
                if tape[head] == 1:
                    pc = jumps[pc] + 1
                    continue
            pc += 1
        if halted:
            steps_out[k] = steps
            keys_out[k] = key if olen <= MAX_KEY_BITS else -1
        else:
            steps_out[k] = -1
            keys_out[k] = 0
        tape[lo:hi + 1] = 0


class CodeBatch:
    """Concatenated token arrays for a list of call-free programs.

    A token 7 in this representation means an unconditional divergence, which
    is how a call behaves when no library is present."""

    def __init__(self, token_lists):
        lengths = np.fromiter((len(t) for t in token_lists), dtype=np.int64, count=len(token_lists))
        self.ends = np.cumsum(lengths).astype(np.int64)
        self.starts = (self.ends - lengths).astype(np.int64)
        total = int(self.ends[-1]) if len(lengths) else 0
        self.code = np.zeros(total, np.int8)
        self.jumps = np.zeros(total, np.int64)
        for start, tokens in zip(self.starts, token_lists):
            s = int(start)
            stack = []
            for off, tok in enumerate(tokens):
                self.code[s + off] = tok
                if tok == 5:
                    stack.append(s + off)
                elif tok == 6:
                    o = stack.pop()
                    self.jumps[o] = s + off
                    self.jumps[s + off] = o

    def __len__(self):
        return len(self.starts)

    def run(self, stream, budget):
        n = len(self.starts)
        steps = np.empty(n, np.int32)
        keys = np.empty(n, np.int64)
        run_batch(self.code, self.starts, self.ends, self.jumps, np.asarray(stream, np.uint8), int(budget), steps, keys)
        return steps, keys


def output_key(output: str) -> int:
    if len(output) > MAX_KEY_BITS:
        return -1
    return int("1" + output, 2)


def key_output(key: int) -> str:
    return bin(key)[3:]
