"""Command-line client for the multsys service.

Every command builds a JSON request and sends it to the HTTP API: by
default an in-process instance of the service, or a remote one when
--server is given.  Commands that verify an inequality exit 0 on pass and
1 on fail; malformed inputs exit 2.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click


def _make_client(server: Optional[str]):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

        from .service.app import app

    return TestClient(app)


def _post(server: Optional[str], path: str, payload: dict) -> dict:
    client = _make_client(server)
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(2)
    return resp.json()


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _flatten(data, prefix: str = "") -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    if isinstance(data, dict):
        for k, v in data.items():
            rows.extend(_flatten(v, f"{prefix}{k}." if not prefix else f"{prefix}{k}."))
    elif isinstance(data, list):
        for i, v in enumerate(data):
            rows.extend(_flatten(v, f"{prefix}{i}."))
    else:
        rows.append((prefix.rstrip("."), json.dumps(data)))
    return rows


def _emit(data, fmt: str, out: Optional[str] = None) -> None:
    if fmt == "csv":
        lines = [f"{k},{v}" for k, v in _flatten(data)]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(data, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _finish(data: dict, fmt: str) -> None:
    """Print a report and exit with its pass/fail status."""
    _emit(data, fmt)
    if "passed" in data:
        sys.exit(0 if data["passed"] else 1)


def common_options(fn):
    fn = click.option("--server", default=None, help="Remote service URL (in-process when omitted).")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--tol", type=float, default=None, help="Override the check tolerance.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the primary output object to this path.")(fn)
    return fn


@click.group()
def main() -> None:
    """Exact verification harness for multiplicative systems of bounded
    step functions."""


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--d", "d", type=int, default=None, help="Order cap (defaults to n).")
@click.option("--family", default=None, help='Subset family: "le:d", "eq:d", or "all".')
@common_options
def error(system_path, d, family, server, fmt, seed, tol, out):
    """Multiplicative error mu_d of a system."""
    payload = {"system": _load_json(system_path), "d": d, "family": family}
    data = _post(server, "/systems/error", payload)
    _emit(data, fmt, out)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--family", required=True, help='Subset family: "le:d", "eq:d", or "all".')
@common_options
def extend(system_path, family, server, fmt, seed, tol, out):
    """Moment-killing extension: zero out every family moment."""
    payload = {"system": _load_json(system_path), "family": family}
    data = _post(server, "/systems/extend", payload)
    if out:
        _write_json(out, data["system"])
    _emit({k: v for k, v in data.items() if k != "system"} if out else data, fmt)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--family", default="all", show_default=True)
@common_options
def moments(system_path, family, server, fmt, seed, tol, out):
    """Exact mixed moments over a subset family."""
    payload = {"system": _load_json(system_path), "family": family}
    data = _post(server, "/systems/moments", payload)
    _emit(data, fmt, out)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@common_options
def extremalize(system_path, trace_path, server, fmt, seed, tol, out):
    """Push every value to its bounds while preserving all subset moments."""
    payload = {"system": _load_json(system_path)}
    data = _post(server, "/extremal/extremalize", payload)
    if trace_path:
        _write_json(trace_path, {"stages": data["stages"]})
    if out:
        _write_json(out, data["system"])
        data = {"stages": len(data["stages"])}
    _emit(data, fmt)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--d", "d", type=int, required=True)
@common_options
def pipeline(system_path, d, server, fmt, seed, tol, out):
    """Extension + extremalization: a two-valued d-multiplicative coupling."""
    payload = {"system": _load_json(system_path), "d": d}
    data = _post(server, "/extremal/pipeline", payload)
    if out:
        _write_json(out, data["system"])
        data = {"d": d, "written": out}
    _emit(data, fmt)


@main.group()
def verify() -> None:
    """Inequality verification."""


@verify.command("theorem1")
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--convex", "convex_path", required=True, type=click.Path(exists=True))
@click.option("--d", "d", type=int, required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None)
@common_options
def verify_theorem1(system_path, convex_path, d, report_path, server, fmt, seed, tol, out):
    """Convex domination against the independent two-valued coupling."""
    payload = {
        "system": _load_json(system_path),
        "spec": _load_json(convex_path),
        "d": d,
    }
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/verify/theorem1", payload)
    if report_path:
        _write_json(report_path, data)
    _finish(data, fmt)


@main.group()
def chaos() -> None:
    """Chaos sums over multiplicative systems."""


@chaos.command("check")
@click.option("--terms", "terms_path", required=True, type=click.Path(exists=True))
@click.option("--p", "p", type=float, required=True)
@common_options
def chaos_check(terms_path, p, server, fmt, seed, tol, out):
    """Hypercontractive moment bound for a pure chaos sum."""
    payload = {"chaos": _load_json(terms_path), "p": p}
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/chaos/check", payload)
    if out:
        _write_json(out, data)
    _finish(data, fmt)


@chaos.command("maximal")
@click.option("--terms", "terms_path", required=True, type=click.Path(exists=True))
@click.option("--order", "order_text", default=None, help="Comma-separated 1-based term positions.")
@click.option("--vector-norm", default="inf", show_default=True)
@common_options
def chaos_maximal(terms_path, order_text, vector_norm, server, fmt, seed, tol, out):
    """Exact maximal partial-sum step function of a chaos sum."""
    order = None
    if order_text:
        order = [int(tok) for tok in order_text.split(",") if tok.strip()]
    payload = {
        "chaos": _load_json(terms_path),
        "order": order,
        "vector_norm": vector_norm,
    }
    data = _post(server, "/chaos/maximal", payload)
    if out:
        _write_json(out, data["maximal"])
        data = {k: v for k, v in data.items() if k != "maximal"}
    _emit(data, fmt)


@chaos.command("compare")
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--terms", "terms_path", required=True, type=click.Path(exists=True))
@click.option("--outer", "outer_text", required=True, help='Outer convex shorthand: "pow:2", "exp:1", "relu:1/2".')
@click.option("--d", "d", type=int, required=True)
@click.option("--order", "order_text", default=None, help="Comma-separated 1-based term positions.")
@common_options
def chaos_compare(system_path, terms_path, outer_text, d, order_text, server, fmt, seed, tol, out):
    """Compare a chaos sum over a bounded base against its Walsh mirror."""
    from .serialize import outer_to_dict, parse_outer_text

    order = None
    if order_text:
        order = [int(tok) for tok in order_text.split(",") if tok.strip()]
    terms_doc = _load_json(terms_path)
    payload = {
        "system": _load_json(system_path),
        "terms": terms_doc["terms"] if isinstance(terms_doc, dict) else terms_doc,
        "outer": outer_to_dict(parse_outer_text(outer_text)),
        "d": d,
        "order": order,
    }
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/chaos/compare", payload)
    if out:
        _write_json(out, data)
    _finish(data, fmt)


@main.group()
def trig() -> None:
    """Trigonometric polynomials and Dirichlet kernels."""


@trig.command("x19")
@click.option("--poly", "poly_path", required=True, type=click.Path(exists=True))
@click.option("--young", "young_text", required=True, help='Young function: "pow:4", "tlog", "expm".')
@click.option("--d", "d", type=int, required=True)
@click.option("--maximal", is_flag=True, default=False)
@common_options
def trig_x19(poly_path, young_text, d, maximal, server, fmt, seed, tol, out):
    """Orlicz norm of a cosine sum against its Walsh mirror."""
    payload = {
        "poly": _load_json(poly_path),
        "young": young_text,
        "d": d,
        "maximal": maximal,
    }
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/trig/x19", payload)
    if out:
        _write_json(out, data)
    _finish(data, fmt)


@trig.command("x21")
@click.option("--poly", "poly_path", required=True, type=click.Path(exists=True))
@click.option("--p", "p", type=float, required=True)
@click.option("--d", "d", type=int, required=True)
@common_options
def trig_x21(poly_path, p, d, server, fmt, seed, tol, out):
    """p-norm of a pure-order cosine sum against its 2-norm bound."""
    payload = {"poly": _load_json(poly_path), "p": p, "d": d}
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/trig/x21", payload)
    if out:
        _write_json(out, data)
    _finish(data, fmt)


@trig.command("dirichlet")
@click.option("--max-n", "max_n", type=int, required=True)
@common_options
def trig_dirichlet(max_n, server, fmt, seed, tol, out):
    """L1 norms of Dirichlet polynomials of length 2^n, n = 1..max_n."""
    payload = {"max_n": max_n}
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/trig/dirichlet", payload)
    rows = data["rows"]
    if fmt == "csv" or (out and out.endswith(".csv")):
        lines = ["n,norm_T,norm_W,ratio"]
        lines += [
            f'{r["n"]},{r["norm_t"]},{r["norm_w"]},{r["ratio"]}' for r in rows
        ]
        text = "\n".join(lines) + "\n"
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
    else:
        _emit(data, fmt, out)


@main.command()
@click.option("--name", required=True, help="extension | theorem1 | extremal | chaos | trig | azuma | all")
@click.option("--scale", type=float, default=1.0, show_default=True, help="Corpus size multiplier.")
@click.option("--summary-only", is_flag=True, default=False)
@common_options
def suite(name, scale, summary_only, server, fmt, seed, tol, out):
    """Run a named verification suite and report the aggregate."""
    payload = {
        "name": name,
        "seed": seed,
        "scale": scale,
        "include_reports": not summary_only,
    }
    data = _post(server, "/suite/run", payload)
    if out:
        _write_json(out, data)
        data = {k: v for k, v in data.items() if k != "reports"}
    _finish(data, fmt)


@main.command()
@click.option("--kind", required=True, help="rademacher | haar-martingale | perturbed-multiplicative | random-step | lacunary-trig")
@click.option("--n", type=int, default=3, show_default=True)
@click.option("--pieces", type=int, default=8, show_default=True)
@click.option("--perturbation", default="1/10", show_default=True)
@click.option("--terms", type=int, default=5, show_default=True)
@click.option("--max-freq", type=int, default=64, show_default=True)
@common_options
def generate(kind, n, pieces, perturbation, terms, max_freq, server, fmt, seed, tol, out):
    """Build a deterministic system (or cosine polynomial) from a seed."""
    payload = {
        "kind": kind,
        "n": n,
        "seed": seed,
        "pieces": pieces,
        "perturbation": perturbation,
        "terms": terms,
        "max_freq": max_freq,
    }
    data = _post(server, "/generate", payload)
    obj = data.get("system", data.get("poly"))
    if out:
        _write_json(out, obj)
        _emit({"kind": kind, "written": out}, fmt)
    else:
        _emit(obj, fmt)


@main.command()
@click.option("--system", "system_path", required=True, type=click.Path(exists=True))
@click.option("--lam", "--lambda", "lam", required=True, help="Tail threshold, rational.")
@common_options
def azuma(system_path, lam, server, fmt, seed, tol, out):
    """Sub-Gaussian tail bound for the member sum."""
    payload = {"system": _load_json(system_path), "lambda": lam}
    if tol is not None:
        payload["tol"] = tol
    data = _post(server, "/azuma", payload)
    if out:
        _write_json(out, data)
    _finish(data, fmt)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
