"""Suite orchestrator -- dispatches one configured command to the library and builds its Report."""

import logging
import math
from dataclasses import replace
from fractions import Fraction
from multiprocessing import Pool
from typing import Any, Callable, Dict, Iterable, List, Tuple, TypeVar

from maxleak import corpus
from maxleak.bounds import (
    BoundReport,
    FLOAT_SLACK,
    NotInformationLosslessError,
    converse_rhs,
    lztype_check,
    permutation_count,
    phrase_state_counts,
    theorem1_audit,
)
from maxleak.config import AuditBudget, ExperimentConfig
from maxleak.dyadic import ONE
from maxleak.fse import (
    EncrypterSpec,
    all_sequences,
    count_type_classes,
    is_information_lossless,
    key_demand,
    key_rate,
    load_spec,
    partition_by_type,
    run,
    type_class_bound,
)
from maxleak.keysource import KeySource
from maxleak.leakage import (
    Channel,
    dump_channel,
    guessing_identity,
    identity_channel,
    induced_channel,
    maximal_leakage,
)
from maxleak.lz78 import (
    Codeword,
    MalformedHeaderError,
    Sequence,
    capped_decode,
    capped_encode,
    code_length_bound,
    decode,
    encode,
    lz_complexity,
    parse,
    phrase_strings,
    raw_width,
)
from maxleak.machines import get_machine, toggle, xor
from maxleak import scheme
from maxleak.report import Report
from maxleak.storage import atomic_bytes_save, atomic_json_save, read_bytes

logger = logging.getLogger("maxleak.suite")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BUDGET = 2
EXIT_USAGE = 3

COMMANDS = (
    "compress",
    "decompress",
    "encrypt",
    "decrypt",
    "fse run",
    "fse audit-il",
    "fse types",
    "leakage",
    "bounds audit",
    "selftest",
)

T = TypeVar("T")
R = TypeVar("R")


class UsageError(ValueError):
    """The configuration lacks an input the command needs."""


def sweep(job: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply ``job`` to every item, across a process pool when workers > 1.

    ``job`` must be a module-level function so it can be pickled.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [job(item) for item in items]
    chunk = max(1, len(items) // (workers * 4))
    with Pool(workers) as pool:
        return list(pool.imap(job, items, chunksize=chunk))


def exit_code(report: Report) -> int:
    return EXIT_OK if report.passed else EXIT_FAILED


# --- Input resolution ---


def resolve_input(cfg: ExperimentConfig) -> Tuple[Sequence, corpus.TextMapping, bytes]:
    """The input Sequence, the byte mapping chosen for it and the bytes it came from."""
    if cfg.input_path is not None:
        return corpus.read_mapped(cfg.input_path, cfg.alpha, cfg.mod)
    if cfg.text is not None:
        data = cfg.text.encode("utf-8")
        x, mapping = corpus.map_bytes(data, cfg.alpha, cfg.mod)
        return x, mapping, data
    raise UsageError(f"{cfg.command!r} needs --in <file> or an inline sequence")


def resolve_sequence(cfg: ExperimentConfig) -> Sequence:
    return resolve_input(cfg)[0]


def resolve_spec(cfg: ExperimentConfig) -> EncrypterSpec:
    if cfg.spec_path is not None:
        return load_spec(cfg.spec_path)
    if cfg.machine is not None:
        try:
            return get_machine(cfg.machine)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    raise UsageError(f"{cfg.command!r} needs --spec <file> or --machine <name>")


def resolve_key(cfg: ExperimentConfig, required: bool) -> KeySource:
    if cfg.key_path is not None:
        return KeySource.from_file(cfg.key_path)
    if cfg.seed is not None or not required:
        return scheme.random_key_source(cfg.seed)
    raise UsageError(f"{cfg.command!r} needs --key <file> or --seed <int>")


def _need_n(cfg: ExperimentConfig) -> int:
    if cfg.n is None:
        raise UsageError(f"{cfg.command!r} needs --n <length>")
    return cfg.n


def _scheme_config(cfg: ExperimentConfig) -> scheme.SchemeConfig:
    return scheme.SchemeConfig(cfg.lam, cfg.alpha, cfg.options.get("compressor", "capped_lz78"), cfg.padded)


def _args(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Command echo; paths are kept as given."""
    return {
        "input": cfg.input_path,
        "text": cfg.text,
        "alpha": cfg.alpha,
        "lambda": str(cfg.lam),
        "spec": cfg.spec_path,
        "machine": cfg.machine,
        "n": cfg.n,
        "key": cfg.key_path,
        "budget": cfg.budget.max_enumeration,
        "padded": cfg.padded,
        "all_x": cfg.all_x,
        "horizon": cfg.horizon,
        "options": dict(sorted(cfg.options.items())),
    }


def _label(x: Sequence) -> str:
    return "".join(str(s) if x.alpha <= 10 else f"{s}," for s in x.symbols)


# --- Commands ---


def _compress(cfg: ExperimentConfig, report: Report) -> None:
    x, mapping, data = resolve_input(cfg)
    p = parse(x)
    plain = encode(x)
    capped = capped_encode(x)
    bound = code_length_bound(p.c, x.alpha)
    stats = {
        **corpus.describe(x),
        "mapping": mapping.kind,
        "c": p.c,
        "rho_lz": lz_complexity(x),
        "body_bits": plain.body_length,
        "capped_bits": capped.body_length,
        "raw_bits": raw_width(len(x), x.alpha),
        "length_bound": bound,
    }
    report.add_result("codec", _label(x) if len(x) <= 64 else f"n={len(x)}", stats)
    report.check("length_bound", plain.body_length <= bound + FLOAT_SLACK)
    report.check("cap_bound", capped.body_length <= raw_width(len(x), x.alpha) + 1)
    restored = capped_decode(capped)
    report.check("round_trip", decode(plain) == x and restored == x)
    if not cfg.mod:
        report.check("byte_exact", corpus.render(restored, mapping) == data)
    if cfg.out_path is not None:
        chosen = plain if cfg.options.get("codec") == "plain" else capped
        atomic_bytes_save(cfg.out_path, replace(chosen, text_tag=mapping.to_tag()).to_bytes())


def _write_plaintext(cfg: ExperimentConfig, x: Sequence, tag: int, data: Dict[str, Any]) -> None:
    try:
        mapping = corpus.TextMapping.from_tag(tag)
    except ValueError as exc:
        raise MalformedHeaderError(str(exc)) from None
    data["mapping"] = mapping.kind
    if cfg.out_path is not None:
        atomic_bytes_save(cfg.out_path, corpus.render(x, mapping))
    else:
        data["sequence"] = corpus.render(x, mapping).decode("latin-1")


def _decompress(cfg: ExperimentConfig, report: Report) -> None:
    if cfg.input_path is None:
        raise UsageError("'decompress' needs --in <file>")
    cw = Codeword.from_bytes(read_bytes(cfg.input_path))
    if cfg.options.get("codec") == "plain" and cw.capped:
        raise UsageError(f"{cfg.input_path} holds a capped codeword, not a --plain one")
    x = capped_decode(cw) if cw.capped else decode(cw)
    data: Dict[str, Any] = {
        "n": len(x), "alpha": x.alpha, "body_bits": cw.body_length, "capped": cw.capped,
    }
    _write_plaintext(cfg, x, cw.text_tag, data)
    report.add_result("codec", cfg.input_path, data)


def _encrypt(cfg: ExperimentConfig, report: Report) -> None:
    x, mapping, _ = resolve_input(cfg)
    sc = _scheme_config(cfg)
    key = resolve_key(cfg, required=True)
    ct = replace(scheme.encrypt(x, sc, key), text_tag=mapping.to_tag())
    report.add_result("ciphertext", f"n={len(x)}", {
        "n": ct.n,
        "m": ct.m,
        "codeword_bits": len(ct.body),
        "clear_bits": len(ct.body) - ct.m,
        "key_rate": str(Fraction(ct.m, ct.n)),
        "rho_lz": lz_complexity(x),
        "leakage_bound": scheme.capped_leakage_bound(ct.n, sc.lam, sc.alpha),
    })
    report.check("key_consumed", key.consumed == ct.m)
    report.check("key_rate_ceiling", Fraction(ct.m, ct.n) <= math.log2(sc.alpha) + Fraction(2, ct.n))
    if cfg.out_path is not None:
        atomic_bytes_save(cfg.out_path, ct.to_bytes())


def _decrypt(cfg: ExperimentConfig, report: Report) -> None:
    if cfg.input_path is None:
        raise UsageError("'decrypt' needs --in <file>")
    ct = scheme.Ciphertext.from_bytes(read_bytes(cfg.input_path))
    x = scheme.decrypt(ct, _scheme_config(cfg), resolve_key(cfg, required=True))
    data: Dict[str, Any] = {"n": len(x), "alpha": x.alpha, "m": ct.m}
    _write_plaintext(cfg, x, ct.text_tag, data)
    report.add_result("plaintext", cfg.input_path, data)


def _fse_run(cfg: ExperimentConfig, report: Report) -> None:
    spec = resolve_spec(cfg)
    x = resolve_sequence(cfg)
    key = resolve_key(cfg, required=False)
    t = key_demand(spec, x)
    trace = run(spec, x, key.consume(t))
    report.add_result("trace", f"{spec.name}:{_label(x)}", {
        "states": trace.states,
        "offsets": trace.offsets,
        "key_segments": trace.key_segments,
        "outputs": trace.outputs,
        "ciphertext": trace.ciphertext,
        "key_rate": str(key_rate(spec, x)),
    })
    report.check("offsets_consistent", trace.key_used == t)


def _fse_audit_il(cfg: ExperimentConfig, report: Report) -> None:
    spec = resolve_spec(cfg)
    il = is_information_lossless(spec, horizon=cfg.horizon, budget=cfg.budget)
    report.add_result("il", spec.name, {
        "verdict": il.verdict,
        "m0": il.m0,
        "horizon": il.horizon,
        "strict": il.strict,
        "collisions": il.collisions,
    })


def _fse_types(cfg: ExperimentConfig, report: Report) -> None:
    spec = resolve_spec(cfg)
    n = _need_n(cfg)
    classes = partition_by_type(spec, n, cfg.budget)
    m_n = len(classes)
    bound = type_class_bound(spec.alpha, spec.s, n)
    sizes = sorted(len(v) for v in classes.values())
    report.add_result("types", f"{spec.name}:n={n}", {
        "type_classes": m_n,
        "bound": bound,
        "sizes": sizes,
    })
    report.check("type_count_bound", m_n <= bound, spec.name)
    report.check("partition", sum(sizes) == spec.alpha ** n, spec.name)
    report.check("count_agrees", count_type_classes(spec, n, cfg.budget) == m_n, spec.name)


def _leakage_checks(report: Report, ch: Channel, instance: str) -> float:
    lr = maximal_leakage(ch)
    report.add_result("leakage", instance, lr.to_dict())
    report.check("rows_normalized", ch.is_normalized(), instance)
    if lr.pc_informed is not None:
        _, _, ratio = guessing_identity(ch)
        report.check("guessing_identity", ratio == lr.sum_max.to_fraction(), instance)
    return lr.leakage_bits


def _leakage(cfg: ExperimentConfig, report: Report) -> None:
    n = _need_n(cfg)
    if cfg.options.get("scheme") is not None:
        if cfg.options["scheme"] != "lz-otp":
            raise UsageError(f"unknown scheme {cfg.options['scheme']!r}; only 'lz-otp' is built")
        sc = _scheme_config(cfg)
        ch = scheme.channel(n, sc, cfg.budget)
        instance = f"lz-otp:n={n}:lambda={sc.lam}:padded={sc.padded}"
        leak = _leakage_checks(report, ch, instance)
        _, l_max = scheme.length_profile(n, sc, cfg.budget)
        bound = scheme.leakage_upper_bound(n, sc.lam, l_max)
        report.add_result("bound", instance, {"l_max": l_max, "upper_bound": bound})
        report.check("leakage_upper_bound", leak <= bound + FLOAT_SLACK, instance)
        if sc.padded and sc.lam == 0:
            report.check("perfect_secrecy", maximal_leakage(ch).sum_max == ONE, instance)
    else:
        spec = resolve_spec(cfg)
        ch = induced_channel(spec, n, cfg.budget)
        _leakage_checks(report, ch, f"{spec.name}:n={n}")
    if cfg.options.get("dump") is not None:
        atomic_json_save(cfg.options["dump"], dump_channel(ch))


def _lztype_job(item: Tuple[EncrypterSpec, Sequence, int, AuditBudget]) -> BoundReport:
    spec, x, size, budget = item
    return lztype_check(spec, x, budget, type_size=size)


def _record_lztype(report: Report, br: BoundReport) -> None:
    report.add_result("lztype", br.instance, br.to_dict())
    for name, ok in br.links.items():
        report.check(name, ok, br.instance)


def _bounds_audit(cfg: ExperimentConfig, report: Report) -> None:
    spec = resolve_spec(cfg)
    if cfg.all_x:
        n = _need_n(cfg)
        jobs = [
            (spec, x, len(members), cfg.budget)
            for members in partition_by_type(spec, n, cfg.budget).values()
            for x in members
        ]
        logger.info("LZ-type sweep of %r at n=%d: %d sequences", spec.name, n, len(jobs))
        for br in sweep(_lztype_job, jobs, cfg.workers):
            _record_lztype(report, br)
        try:
            tr = theorem1_audit(spec, n, cfg.budget)
        except NotInformationLosslessError as exc:
            report.add_result("converse", f"{spec.name}:n={n}", {"skipped": str(exc)})
        else:
            report.add_result("converse", tr.instance, tr.to_dict())
            for name, ok in tr.links.items():
                report.check(name, ok, tr.instance)
        return
    x = resolve_sequence(cfg)
    br = lztype_check(spec, x, cfg.budget)
    _record_lztype(report, br)
    n = len(x)
    rho = lz_complexity(x)
    _, key_rate_floor = converse_rhs(n, cfg.lam, spec.alpha, spec.s, rho, br.delta_s)
    report.add_result("converse_terms", br.instance, {
        "key_rate": float(key_rate(spec, x)),
        "key_rate_lower_bound": key_rate_floor,
    })


def selftest(report: Report, budget: AuditBudget) -> None:
    """Fast end-to-end checks against the worked examples."""
    ex = Sequence.from_text("abbabaabbaaabaa")
    p = parse(ex)
    texts = ["".join("ab"[s] for s in ph) for ph in phrase_strings(p, ex)]
    report.check("parse_example", texts == ["a", "b", "ba", "baa", "bb", "aa", "ab", "aa"], "abbabaabbaaabaa")
    report.check("rho_example", abs(lz_complexity(ex) - 1.6) < 1e-12, "abbabaabbaaabaa")
    report.check("encode_a", str(encode(Sequence.of([0])).body) == "0", "a")
    report.check("encode_ab", str(encode(Sequence.of([0, 1])).body) == "001", "ab")
    report.check("capped_a", capped_encode(Sequence.of([0])).body_length == 2, "a")
    round_trip = all(
        decode(encode(x)) == x and capped_decode(capped_encode(x)) == x
        for n in range(1, 9)
        for x in all_sequences(2, n)
    )
    report.check("round_trip", round_trip, "alpha=2,n<=8")
    report.check("one_time_pad", maximal_leakage(induced_channel(xor(), 1, budget)).sum_max == ONE, "xor:n=1")
    report.check("identity", maximal_leakage(identity_channel(8)).leakage_bits == 3.0, "identity:8")
    report.check("half_pad", maximal_leakage(induced_channel(toggle(), 2, budget)).leakage_bits == 1.0, "toggle:n=2")
    ch = induced_channel(toggle(), 3, budget)
    _, _, ratio = guessing_identity(ch)
    report.check("guessing_identity", ratio == maximal_leakage(ch).sum_max.to_fraction(), "toggle:n=3")
    sc = scheme.SchemeConfig(Fraction(1, 2))
    leak = maximal_leakage(scheme.channel(6, sc, budget)).leakage_bits
    report.check("scheme_bound", leak <= scheme.capped_leakage_bound(6, sc.lam) + FLOAT_SLACK, "lz-otp:n=6")
    spec = toggle()
    factorial_ok = all(
        len(members) >= permutation_count(phrase_state_counts(spec, x))
        for members in partition_by_type(spec, 6, budget).values()
        for x in members
    )
    report.check("factorial_bound", factorial_ok, "toggle:n=6")


_DISPATCH: Dict[str, Callable[[ExperimentConfig, Report], None]] = {
    "compress": _compress,
    "decompress": _decompress,
    "encrypt": _encrypt,
    "decrypt": _decrypt,
    "fse run": _fse_run,
    "fse audit-il": _fse_audit_il,
    "fse types": _fse_types,
    "leakage": _leakage,
    "bounds audit": _bounds_audit,
    "selftest": lambda cfg, report: selftest(report, cfg.budget),
}


def run_suite(cfg: ExperimentConfig) -> Report:
    """Run the configured command and return its Report.

    Raises:
        UsageError: On a missing input, spec or key.
        BudgetExceededError: If an enumeration is over budget.
    """
    if cfg.command not in _DISPATCH:
        raise UsageError(f"Unknown command {cfg.command!r}. Valid: {', '.join(COMMANDS)}")
    report = Report(cfg.command, _args(cfg), cfg.seed)
    logger.info("running %s", cfg.command)
    _DISPATCH[cfg.command](cfg, report)
    logger.info(
        "%s finished: %d results, %d checks, %d failed",
        cfg.command, len(report.results), len(report.checks), len(report.failures),
    )
    return report
