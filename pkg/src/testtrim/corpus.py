"""Corpus synthesis: circuits -> fault dictionaries -> traces -> dataset.

Each corpus slot is one failing circuit: a netlist (generated or loaded),
a seeded pattern set, and one seeded injected fault drawn from the faults
the pattern set can actually detect.  Slots use independent sub-seeds
derived from the corpus seed, so the whole corpus is reproducible and
individual slots do not perturb each other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .dataset import Dataset, dataset_from_traces, split
from .diagnosis import DiagnosisTrace, trace_diagnosis
from .faultsim import (FaultDictionary, build_fault_dictionary,
                       exhaustive_patterns, random_patterns)
from .generator import random_circuit
from .netlist import Circuit, parse_bench

_MAX_GENERATION_ATTEMPTS = 50


@dataclass
class Corpus:
    circuits: list[Circuit]
    dictionaries: list[FaultDictionary]
    traces: list[DiagnosisTrace]
    dataset: Dataset
    seed: int
    generated: bool


def _patterns_for(circuit: Circuit, spec: int | str, seed: int):
    if spec == "exhaustive":
        return exhaustive_patterns(len(circuit.inputs))
    return random_patterns(len(circuit.inputs), int(spec), seed)


def _slot_rng(corpus_seed: int, slot: int, attempt: int) -> random.Random:
    # string seeding hashes with SHA-512 internally: stable across platforms
    return random.Random(f"testtrim:{corpus_seed}:{slot}:{attempt}")


def build_corpus(cfg: RunConfig, keep_sets: bool = False) -> Corpus:
    """Build the full corpus described by the config.

    With the built-in generator, slots whose pattern set detects no fault
    at all are regenerated with a fresh sub-seed; with user netlists they
    are skipped (a warning-free no-op: the circuit emits no trace).
    """
    circuits: list[Circuit] = []
    dictionaries: list[FaultDictionary] = []
    traces: list[DiagnosisTrace] = []

    if cfg.corpus_netlist_dir is not None:
        paths = sorted(Path(cfg.corpus_netlist_dir).glob("*.bench"))
        if not paths:
            raise ValueError(f"no .bench files in {cfg.corpus_netlist_dir}")
        for slot, path in enumerate(paths):
            circuit = parse_bench(path.read_text(), name=path.stem)
            rng = _slot_rng(cfg.corpus_seed, slot, 0)
            patterns = _patterns_for(circuit, cfg.corpus_patterns, rng.randrange(1 << 32))
            fdict = build_fault_dictionary(circuit, patterns, seed=cfg.corpus_seed)
            detectable = fdict.detected_fault_indices()
            if not detectable:
                continue
            injected = fdict.faults[rng.choice(detectable)]
            circuits.append(circuit)
            dictionaries.append(fdict)
            traces.append(trace_diagnosis(fdict, injected, keep_sets=keep_sets))
    else:
        for slot in range(cfg.corpus_circuits):
            for attempt in range(_MAX_GENERATION_ATTEMPTS):
                rng = _slot_rng(cfg.corpus_seed, slot, attempt)
                circuit = random_circuit(
                    f"c{slot:03d}", rng,
                    min_inputs=cfg.corpus_min_inputs, max_inputs=cfg.corpus_max_inputs,
                    min_gates=cfg.corpus_min_gates, max_gates=cfg.corpus_max_gates)
                patterns = _patterns_for(circuit, cfg.corpus_patterns, rng.randrange(1 << 32))
                fdict = build_fault_dictionary(circuit, patterns, seed=cfg.corpus_seed)
                detectable = fdict.detected_fault_indices()
                if detectable:
                    break
            else:
                raise RuntimeError(f"no detectable fault found for slot {slot} after "
                                   f"{_MAX_GENERATION_ATTEMPTS} attempts")
            injected = fdict.faults[rng.choice(detectable)]
            circuits.append(circuit)
            dictionaries.append(fdict)
            traces.append(trace_diagnosis(fdict, injected, keep_sets=keep_sets))

    if not traces:
        raise ValueError("corpus produced no diagnosable traces")
    return Corpus(
        circuits=circuits,
        dictionaries=dictionaries,
        traces=traces,
        dataset=dataset_from_traces(traces),
        seed=cfg.corpus_seed,
        generated=cfg.corpus_netlist_dir is None,
    )


@dataclass
class CorpusSplit:
    """Circuit-disjoint train / validation / test portions with their traces."""

    train: Dataset
    validation: Dataset | None
    test: Dataset
    train_traces: list[DiagnosisTrace]
    validation_traces: list[DiagnosisTrace]
    test_traces: list[DiagnosisTrace]

    @property
    def trainval_circuits(self) -> set[str]:
        ids = set(self.train.circuit_ids())
        if self.validation is not None:
            ids |= set(self.validation.circuit_ids())
        return ids


def split_corpus(dataset: Dataset, traces: list[DiagnosisTrace], cfg: RunConfig,
                 with_validation: bool = True) -> CorpusSplit:
    """Two seeded circuit-level splits: test held out first, then validation
    carved from the train side when requested."""
    trainval, test = split(dataset, cfg.split_train_fraction, cfg.split_seed)
    validation = None
    train = trainval
    if with_validation and cfg.split_validation_fraction > 0.0:
        # derived seed keeps the two shuffles independent
        train, validation = split(trainval, 1.0 - cfg.split_validation_fraction,
                                  cfg.split_seed + 1)

    by_id = {t.circuit_id: t for t in traces}
    def pick(ds: Dataset | None) -> list[DiagnosisTrace]:
        if ds is None:
            return []
        return [by_id[cid] for cid in ds.circuit_ids()]

    return CorpusSplit(
        train=train, validation=validation, test=test,
        train_traces=pick(train),
        validation_traces=pick(validation),
        test_traces=pick(test),
    )
