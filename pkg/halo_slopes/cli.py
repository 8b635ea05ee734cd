"""Command line interface for halo-slopes."""

import functools
import sys
from typing import Callable, List, Optional, Tuple

try:
    import click
except ImportError:
    print("Error: Click library not installed. Please run 'pip install -r requirements.txt'")
    sys.exit(1)

try:
    from rich.console import Console
    from rich.table import Table
except ImportError:
    print("Error: Rich library not installed. Please run 'pip install -r requirements.txt'")
    sys.exit(1)

from pydantic import ValidationError

from .config import RunConfig, load_config
from .modules.classical_space import (
    ClassicalSpace,
    al_duality_check,
    classical_hecke_matrix,
    compare_classicality,
    slope_multiset,
    slope_range_anomalies,
)
from .modules.coset_data import (
    CosetDataset,
    DatasetError,
    dataset_digest,
    gen_synthetic,
    parse_dataset,
    serialize_dataset,
    validate_dataset,
)
from .modules.distribution_module import hecke_matrix_overconv
from .modules.fredholm_newton import (
    LambdaSeries,
    default_z_samples,
    fredholm_bound_check,
    fredholm_series,
    halo_report,
    lambda_lower_bound,
    newton_polygon,
    small_slope_scan,
    specialize,
    z_sample,
)
from .modules.padic_arith import PadicElement, PrecisionError
from .modules.weight_space import FiniteCharacter, WeightComponent, WeightError, make_locally_algebraic
from .utils.log import setup_logging
from .utils.reporting import Report, format_fraction, write_report

console = Console(stderr=True)

EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_PRECISION = 3


def _handle_errors(func: Callable) -> Callable:
    """Map library errors to exit codes: ValueError 2, PrecisionError 3, anything else 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PrecisionError as e:
            console.print(f"❌ [bold red]Precision exhausted: {e}[/bold red]")
            sys.exit(EXIT_PRECISION)
        except ValidationError as e:
            console.print(f"❌ [bold red]Invalid configuration: {e}[/bold red]")
            sys.exit(EXIT_INPUT)
        except ValueError as e:
            console.print(f"❌ [bold red]Invalid input: {e}[/bold red]")
            sys.exit(EXIT_INPUT)
        except OSError as e:
            console.print(f"❌ [bold red]Cannot access file: {e}[/bold red]")
            sys.exit(EXIT_INPUT)
        except click.exceptions.Exit:
            raise
        except Exception as e:
            console.print(f"❌ [bold red]Unexpected error: {e}[/bold red]")
            sys.exit(EXIT_FAILURE)

    return wrapper


def _common_options(func: Callable) -> Callable:
    options = [
        click.option("--config", "-c", type=click.Path(exists=True), help="Path to a dotenv configuration file"),
        click.option("--output", "-o", type=click.Path(), help="Write the report here instead of stdout"),
        click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default=None, help="Output format"),
        click.option("--approx", is_flag=True, help="Add a non-authoritative decimal column"),
        click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _arith_options(func: Callable) -> Callable:
    options = [
        click.option("--dataset", "-d", type=click.Path(exists=True), help="Coset dataset file"),
        click.option("--p", "p", type=int, default=None, help="The prime p"),
        click.option("--prec", type=int, default=None, help="p-adic precision N (default 20)"),
        click.option("--xprec", type=int, default=None, help="X-truncation Mx (default 12)"),
        click.option("--moments", type=int, default=None, help="Moment truncation M (default 24)"),
        click.option("--threads", type=int, default=None, help="Worker threads"),
        click.option("--max-dim", type=int, default=None, help="Cap on matrix dimension"),
        click.option("--k", "k", type=int, default=None, help="Weight k"),
        click.option("--w", "w", type=int, default=None, help="Central weight w"),
        click.option("--eps", default=None, help="Character pair 'm:tame:wild,m:tame:wild'"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _setup(config: Optional[str], verbose: bool, **overrides) -> RunConfig:
    setup_logging(verbose)
    if overrides.get("fmt") is not None:
        overrides["format"] = overrides.pop("fmt")
    else:
        overrides.pop("fmt", None)
    return load_config(config, **overrides)


def _emit(report: Report, cfg: RunConfig, digest: str = "none") -> None:
    if cfg.approx and report.approx_source:
        report = report.with_approx("approx", report.approx_source)
    text = write_report(report, cfg.format, cfg.header_dict(), digest, cfg.output)
    if cfg.output:
        console.print(f"✅ Report saved to: [bold green]{cfg.output}[/bold green]")
    else:
        click.echo(text, nl=False)


def _load_dataset(cfg: RunConfig, p_given: Optional[int]) -> CosetDataset:
    if not cfg.dataset:
        raise DatasetError("a dataset is required (--dataset)")
    with open(cfg.dataset, "rb") as f:
        ds = parse_dataset(f.read())
    if p_given is not None and p_given != ds.p:
        raise DatasetError(f"--p {p_given} disagrees with the dataset prime {ds.p}")
    return ds


def _parse_eps(p: int, text: Optional[str]) -> Optional[Tuple[FiniteCharacter, FiniteCharacter]]:
    if not text:
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise WeightError(f"--eps takes two characters separated by a comma, got {text!r}")
    return FiniteCharacter.parse(p, parts[0]), FiniteCharacter.parse(p, parts[1])


def _parse_z(p: int, text: Optional[str], prec: int, c: int) -> List[PadicElement]:
    if not text:
        return default_z_samples(p, c, prec)
    samples = []
    for token in text.split(","):
        parts = token.strip().split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"cannot read z sample {token!r}; use cyc:L[:pow] or rad:e[:pow]")
        try:
            level = int(parts[1])
            power = int(parts[2]) if len(parts) == 3 else 1
        except ValueError as e:
            raise ValueError(f"cannot read z sample {token!r}: {e}") from e
        samples.append(z_sample(p, parts[0], level, power, prec))
    return samples


def _weight_w(cfg: RunConfig, ds: CosetDataset) -> int:
    if cfg.w is not None and cfg.w != ds.w:
        raise WeightError(f"--w {cfg.w} disagrees with the dataset w={ds.w}")
    return ds.w


def _component(cfg: RunConfig, ds: CosetDataset) -> WeightComponent:
    """The component of the requested (k, eps), or of the smallest k of the right parity."""
    w = _weight_w(cfg, ds)
    k = cfg.k if cfg.k is not None else (2 if w % 2 == 0 else 3)
    return make_locally_algebraic(k, w, _parse_eps(ds.p, cfg.eps), p=ds.p).component


def _series(cfg: RunConfig, ds: CosetDataset, n_max: Optional[int]) -> LambdaSeries:
    component = _component(cfg, ds)
    matrix = hecke_matrix_overconv(ds, "Uv", component, cfg.moments, cfg.prec, cfg.xprec, cfg.max_dim, cfg.threads)
    n = min(matrix.size, n_max if n_max is not None else 12)
    return fredholm_series(matrix, n, component=component, t_prime=ds.t_prime, threads=cfg.threads)


def _slope_table(title: str, rows: List[Tuple[str, str]]) -> None:
    table = Table(title=title)
    table.add_column("Item", style="cyan")
    table.add_column("Value", style="magenta")
    for name, value in rows:
        table.add_row(name, value)
    console.print(table)


@click.group()
def cli():
    """halo-slopes - U_p-slopes of overconvergent quaternionic forms near the weight-space boundary."""
    pass


@cli.command("lambda")
@click.option("--t", "t_prime", type=int, required=True, help="Rank t' of M^t over the distribution module")
@click.option("--n", "n_max", type=int, required=True, help="Number of terms")
@click.option("--p", "p", type=int, default=None, help="The prime p")
@_common_options
@_handle_errors
def lambda_cmd(t_prime, n_max, p, config, output, fmt, approx, verbose):
    """Print the first n terms lambda(0), ..., lambda(n-1) of the lower-bound sequence."""
    cfg = _setup(config, verbose, p=p, output=output, fmt=fmt, approx=approx)
    values = lambda_lower_bound(t_prime, range(n_max), cfg.p)
    rows = [{"n": n, "lambda": v} for n, v in enumerate(values)]
    _emit(Report("lambda", ["n", "lambda"], rows, {"t_prime": t_prime, "p": cfg.p, "lambda": values}), cfg)


@cli.command()
@_arith_options
@click.option("--n-max", type=int, default=None, help="Number of Fredholm coefficients (default 12)")
@_common_options
@_handle_errors
def charpoly(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, n_max, config, output, fmt, approx, verbose):
    """Fredholm series of U_v over the weight component, with the lambda bound checked."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, xprec=xprec, moments=moments, threads=threads,
        max_dim=max_dim, k=k, w=w, eps=eps, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    series = _series(cfg, ds, n_max)
    checks = fredholm_bound_check(series)
    body = {
        "series": series.to_dict(),
        "coefficients": series.rows(),
        "bound": [c.to_dict() for c in checks],
    }
    _emit(Report("charpoly", ["n", "m", "coeffs"], series.rows(), body), cfg, dataset_digest(ds))
    violations = [c.n for c in checks if c.status == "violation"]
    if violations:
        console.print(f"⚠️  [yellow]Fredholm bound violated at n = {violations}[/yellow]")


def _polygon_rows(polygon) -> List[dict]:
    rows = []
    for row in polygon.rows():
        slope = row["slope"]
        rows.append(
            {
                "n": row["n"],
                "val_num": row["value"].numerator,
                "val_den": row["value"].denominator,
                "slope_from_prev_num": "" if slope is None else slope.numerator,
                "slope_from_prev_den": "" if slope is None else slope.denominator,
                "certified": row["certified"],
                "value": format_fraction(row["value"]),
            }
        )
    return rows


POLYGON_COLUMNS = ["n", "val_num", "val_den", "slope_from_prev_num", "slope_from_prev_den", "certified"]


@cli.command()
@_arith_options
@click.option("--z", "z_spec", default=None, help="One z sample: cyc:L[:pow] or rad:e[:pow]")
@click.option("--n-max", type=int, default=None, help="Number of Fredholm coefficients (default 12)")
@_common_options
@_handle_errors
def newton(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, z_spec, n_max, config, output, fmt, approx, verbose):
    """Newton polygon of the Fredholm series specialized at z."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, xprec=xprec, moments=moments, threads=threads,
        max_dim=max_dim, k=k, w=w, eps=eps, z=z_spec, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    series = _series(cfg, ds, n_max)
    z = _parse_z(ds.p, cfg.z, cfg.prec, series.c)[0]
    specialized = specialize(series, z)
    polygon = newton_polygon(specialized.valuations, specialized.structural_bounds())
    rows = _polygon_rows(polygon)
    body = {"specialization": specialized.to_dict(), "vertices": rows}
    _emit(Report("newton", POLYGON_COLUMNS, rows, body, approx_source="value"), cfg, dataset_digest(ds))


@cli.command()
@_arith_options
@click.option("--z", "z_spec", default=None, help="z samples, comma separated (default: three annulus points)")
@click.option("--k-max", type=int, required=True, help="Largest weight k in the report")
@_common_options
@_handle_errors
def halo(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, z_spec, k_max, config, output, fmt, approx, verbose):
    """Halo decomposition: windows around each n_k, interval ranks and per-z certification."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, xprec=xprec, moments=moments, threads=threads,
        max_dim=max_dim, k=k, w=w, eps=eps, z=z_spec, k_max=k_max, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    component = _component(cfg, ds)
    k_min = 2 if ds.w % 2 == 0 else 3
    t = ds.t_prime
    n_needed = (cfg.k_max - 1) * ds.p ** (component.c + 1) * t + t
    series = _series(cfg, ds, n_needed)
    samples = _parse_z(ds.p, cfg.z, cfg.prec, series.c)
    report = halo_report(series, range(k_min, cfg.k_max + 1, 2), samples)
    rows = [c.to_dict() for c in report.components]
    _emit(Report("halo", ["interval", "rank", "start", "end"], rows, report.to_dict()), cfg, dataset_digest(ds))
    _slope_table("Halo components", [(c.label, str(c.rank)) for c in report.components])
    if not report.ok:
        console.print("⚠️  [yellow]Some halo checks failed or stayed unresolved[/yellow]")


@cli.command()
@_arith_options
@click.option("--levels", "scan_levels", type=int, default=None, help="Conductor levels to try (default 3)")
@_common_options
@_handle_errors
def scan(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, scan_levels, config, output, fmt, approx, verbose):
    """Weights of weight (k, w) with growing conductor, until every certified slope is below k-1."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, xprec=xprec, moments=moments, threads=threads,
        max_dim=max_dim, k=k, w=w, eps=eps, scan_levels=scan_levels, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    if cfg.k is None:
        raise WeightError("--k is required")
    series = _series(cfg, ds, None)
    result = small_slope_scan(series, cfg.k, _weight_w(cfg, ds), cfg.scan_levels, cfg.prec)
    rows = [
        {
            "weight": entry.weight.descriptor,
            "z_valuation": format_fraction(entry.z_valuation),
            "slope_bound": format_fraction(entry.slope_bound),
            "below": entry.below,
        }
        for entry in result.entries
    ]
    columns = ["weight", "z_valuation", "slope_bound", "below"]
    _emit(Report("scan", columns, rows, result.to_dict()), cfg, dataset_digest(ds))
    if result.first is None:
        console.print(f"⚠️  [yellow]No scanned weight brought every certified slope below {cfg.k - 1}[/yellow]")


def _classical_rows(slopes) -> List[dict]:
    return [
        {"index": i, "slope": format_fraction(s.value), "certified": s.exact}
        for i, s in enumerate(slopes)
    ]


@cli.command()
@_arith_options
@_common_options
@_handle_errors
def classical(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, config, output, fmt, approx, verbose):
    """U_v-slopes on the classical space of weight (k, w) and character eps."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, threads=threads, max_dim=max_dim,
        k=k, w=w, eps=eps, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    if cfg.k is None:
        raise WeightError("--k is required")
    w_value = _weight_w(cfg, ds)
    pair = _parse_eps(ds.p, cfg.eps)
    space = ClassicalSpace(ds, cfg.k, w_value, pair)
    matrix = classical_hecke_matrix(ds, cfg.k, w_value, pair, prec=cfg.prec, max_dim=cfg.max_dim, threads=cfg.threads)
    slopes = slope_multiset(matrix)
    anomalies = slope_range_anomalies(slopes, cfg.k)
    body = {
        "space": space.to_dict(),
        "slopes": slopes.to_dict(),
        "anomalies": [str(s) for s in anomalies],
    }
    report = Report("classical", ["index", "slope", "certified"], _classical_rows(slopes), body, approx_source="slope")
    _emit(report, cfg, dataset_digest(ds))
    if anomalies:
        console.print(f"⚠️  [yellow]{len(anomalies)} slopes outside [0, {cfg.k - 1}][/yellow]")


@cli.command("compare-classicality")
@_arith_options
@click.option("--step", type=int, default=None, help="Moment increment for the stability check (default 4)")
@_common_options
@_handle_errors
def compare_classicality_cmd(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, step, config, output, fmt, approx, verbose):
    """Classical slopes below k-1 against overconvergent slopes at M and M + step."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, moments=moments, threads=threads, max_dim=max_dim,
        k=k, w=w, eps=eps, step=step, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    if cfg.k is None:
        raise WeightError("--k is required")
    result = compare_classicality(
        ds, cfg.k, _weight_w(cfg, ds), _parse_eps(ds.p, cfg.eps), cfg.moments, cfg.prec, cfg.step, cfg.max_dim, cfg.threads
    )
    rows = [{"moments": "classical", "slopes": " ".join(str(s) for s in result.classical), "matches": True}]
    for m, slopes in result.overconvergent.items():
        rows.append({"moments": m, "slopes": " ".join(str(s) for s in slopes), "matches": result.matches[m]})
    _emit(Report("compare-classicality", ["moments", "slopes", "matches"], rows, result.to_dict()), cfg, dataset_digest(ds))
    if not result.ok:
        console.print("⚠️  [yellow]Classicality comparison did not match[/yellow]")


@cli.command("al-check")
@_arith_options
@_common_options
@_handle_errors
def al_check(dataset, p, prec, xprec, moments, threads, max_dim, k, w, eps, config, output, fmt, approx, verbose):
    """Atkin-Lehner duality between the slopes at eps and at eps^-1."""
    cfg = _setup(
        config, verbose, dataset=dataset, p=p, prec=prec, threads=threads, max_dim=max_dim,
        k=k, w=w, eps=eps, output=output, fmt=fmt, approx=approx,
    )
    ds = _load_dataset(cfg, p)
    if cfg.k is None:
        raise WeightError("--k is required")
    w_value = _weight_w(cfg, ds)
    pair = _parse_eps(ds.p, cfg.eps) or (FiniteCharacter.trivial(ds.p), FiniteCharacter.trivial(ds.p))
    inverse = (pair[0].inverse(), pair[1].inverse())
    space = ClassicalSpace(ds, cfg.k, w_value, pair)
    slopes = slope_multiset(classical_hecke_matrix(ds, cfg.k, w_value, pair, prec=cfg.prec, threads=cfg.threads))
    slopes_inv = slope_multiset(classical_hecke_matrix(ds, cfg.k, w_value, inverse, prec=cfg.prec, threads=cfg.threads))
    report = al_duality_check(slopes, slopes_inv, cfg.k, space.dimension)
    count = len(slopes)
    rows = [
        {
            "index": i,
            "slope": str(slopes[i]),
            "dual_slope": str(slopes_inv[count - 1 - i]),
            "ok": i not in report.violations and i not in report.unresolved,
        }
        for i in range(count)
    ]
    _emit(Report("al-check", ["index", "slope", "dual_slope", "ok"], rows, report.to_dict()), cfg, dataset_digest(ds))
    if not report.ok:
        console.print(f"⚠️  [yellow]Duality fails; first violation at index {report.first_violation}[/yellow]")


@cli.command("gen-synthetic")
@click.option("--seed", type=int, required=True, help="Seed of the generator")
@click.option("--p", "p", type=int, default=None, help="The prime p")
@click.option("--d", "d", type=int, default=1, help="Number of places above p")
@click.option("--t", "t", type=int, default=1, help="Number of classes")
@click.option("--w", "w", type=int, default=0, help="Central weight w")
@click.option("--k-list", default="", help="Fixed weights at the other places, comma separated")
@click.option("--n-data", type=int, default=0, help="Number of away-from-p Hecke data")
@click.option("--level", type=int, default=1, help="Level exponent n of K_1(p^n)")
@click.option("--no-perturb", is_flag=True, help="Use the bare coset representatives")
@click.option("--config", "-c", type=click.Path(exists=True), help="Path to a dotenv configuration file")
@click.option("--output", "-o", type=click.Path(), help="Write the dataset here instead of stdout")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr")
@_handle_errors
def gen_synthetic_cmd(seed, p, d, t, w, k_list, n_data, level, no_perturb, config, output, verbose):
    """Write a deterministic synthetic coset dataset."""
    cfg = _setup(config, verbose, p=p, seed=seed, w=w, output=output)
    ks = [int(x) for x in k_list.split(",") if x.strip()]
    ds = gen_synthetic(seed, cfg.p, d=d, t=t, k_list=ks, w=w, n_data=n_data, perturb=not no_perturb, level=level)
    data = serialize_dataset(ds)
    if cfg.output:
        with open(cfg.output, "wb") as f:
            f.write(data)
        console.print(f"✅ Dataset saved to: [bold green]{cfg.output}[/bold green] (sha256 {dataset_digest(ds)})")
    else:
        click.echo(data.decode("ascii"), nl=False)


@cli.command()
@click.option("--dataset", "-d", type=click.Path(exists=True), required=True, help="Coset dataset file")
@_common_options
@_handle_errors
def validate(dataset, config, output, fmt, approx, verbose):
    """Check every item of a dataset against the membership conditions."""
    cfg = _setup(config, verbose, dataset=dataset, output=output, fmt=fmt, approx=approx)
    with open(cfg.dataset, "rb") as f:
        ds = parse_dataset(f.read(), validate=False)
    report = validate_dataset(ds)
    rows = [c.to_dict() for c in report.failures]
    columns = ["datum", "item", "place", "condition", "passed", "detail"]
    _emit(Report("validate", columns, rows, report.to_dict()), cfg, dataset_digest(ds))
    if report.ok:
        console.print(f"✅ [bold green]All {len(report.checks)} checks passed[/bold green]")
    else:
        console.print(f"❌ [bold red]{len(report.failures)} of {len(report.checks)} checks failed[/bold red]")
        sys.exit(EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(cli())
