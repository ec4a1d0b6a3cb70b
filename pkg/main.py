import functools
import json
import sys

import click
import numpy as np
from loguru import logger

import basis_io
import construct
import cosine
import matkernel
import spanning
import utils
from api import PositiveBasis
from exceptions import (
    BasisFileError,
    CompositionError,
    DimensionError,
    InvalidBlock,
    InvalidPartition,
    NotOmegaPlus,
    NotPositiveBasis,
    NotUnit,
    PosBasisError,
    SizeOutOfRange,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_SIZE = 2
EXIT_NOT_POSITIVE_BASIS = 3
EXIT_INVALID_PARTITION = 4
EXIT_COMPOSITION = 5

EXIT_CODES = [
    (BasisFileError, EXIT_PARSE),
    (SizeOutOfRange, EXIT_SIZE),
    (DimensionError, EXIT_SIZE),
    (NotPositiveBasis, EXIT_NOT_POSITIVE_BASIS),
    (NotUnit, EXIT_NOT_POSITIVE_BASIS),
    (InvalidPartition, EXIT_INVALID_PARTITION),
    (NotOmegaPlus, EXIT_INVALID_PARTITION),
    (CompositionError, EXIT_COMPOSITION),
]


def exit_code(error):
    for cls, code in EXIT_CODES:
        if isinstance(error, cls):
            return code
    return EXIT_PARSE


def exit_on_error(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PosBasisError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(exit_code(e))
    return wrapper


def parse_vector(ctx, param, value):
    if value is None:
        return None
    if isinstance(value, tuple):
        return tuple(parse_vector(ctx, param, v) for v in value)
    try:
        vec = np.array([float(x) for x in value.replace(" ", "").split(",")])
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")
    if not np.all(np.isfinite(vec)):
        raise click.BadParameter("vector entries must be finite")
    return vec


def emit(basis, output, fmt):
    if output is None or output == "-":
        click.echo(basis_io.dumps(basis, fmt or basis_io.JSON), nl=False)
    else:
        basis_io.write_basis_file(basis, output, fmt)


def load(path, fmt, with_partition=True):
    f = basis_io.read_basis_file(path, fmt, with_partition)
    logger.info("loaded {}x{} basis from {}", f.n, f.s, path)
    return f


format_option = click.option(
    "--format", "fmt", type=click.Choice(basis_io.FORMATS), default=None,
    help="File format (default: from the file extension, else json)",
)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Path to a config.json")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging and progress bars")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None, help="Also log to this file")
@click.pass_context
def cli(ctx, config_path, verbose, log_file):
    """Positive bases of R^n and their cosine measure."""
    if config_path is not None:
        hps = utils.set_hparams(utils.get_hparams_from_file(config_path))
    else:
        hps = utils.get_hparams()
    utils.get_logger("DEBUG" if verbose else hps.logging.level, log_file)
    ctx.obj = {"hps": hps, "quiet": not verbose}


@cli.command()
@click.option("--n", "n", type=int, required=True, help="Dimension of the space")
@click.option("--s", "s", type=int, required=True, help="Number of vectors, n+1 <= s <= 2n")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Output file (default: stdout)")
@format_option
@click.option("--align", type=str, default=None, callback=parse_vector, help="Realign so that the first column points along this vector")
@click.option("--ambient", type=int, default=None, help="Embed the basis into R^ambient")
@click.option("--offset", type=int, default=0, show_default=True, help="First coordinate used by the embedded basis")
@click.pass_context
@exit_on_error
def generate(ctx, n, s, output, fmt, align, ambient, offset):
    """Write an optimal positive basis of R^n of size s."""
    basis = PositiveBasis.optimal(n, s, hps=ctx.obj["hps"])
    meta = {
        "generator": "optimal_intermediate",
        "dims": ",".join(str(m) for m in construct.dims_for(n, s)),
        "cm_formula": repr(construct.cm_formula(n, s)),
    }
    if align is not None:
        norm = float(np.linalg.norm(align))
        if norm == 0.0:
            raise click.BadParameter("cannot align to the zero vector", param_hint="--align")
        basis = basis.realign(align / norm)
        meta["aligned_to"] = ",".join(repr(float(x)) for x in align / norm)
    matrix, partition = basis.matrix, basis.partition
    if ambient is not None:
        if ambient < n or offset < 0 or offset + n > ambient:
            raise DimensionError(f"cannot embed R^{n} at offset {offset} in R^{ambient}")
        embedded = np.zeros((ambient, s))
        embedded[offset : offset + n] = matrix
        matrix, partition = embedded, None
        meta["ambient"] = str(ambient)
        meta["offset"] = str(offset)
    emit(basis_io.BasisFile(matrix, partition, meta), output, fmt)


@cli.command()
@click.option("--input", "-i", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@format_option
@click.option("--method", type=click.Choice([cosine.FULL, cosine.STRUCTURED, cosine.SAMPLED]), default=cosine.FULL, show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Sample count for the sampled method")
@click.option("--seed", type=int, default=None, help="Seed for the sampled method (required)")
@click.option("--force", is_flag=True, help="Fall back to sampling when the input is not a positive basis")
@click.pass_context
@exit_on_error
def cm(ctx, input_path, fmt, method, samples, seed, force):
    """Cosine measure of a basis file, as a JSON report."""
    f = load(input_path, fmt)
    hps, quiet = ctx.obj["hps"], ctx.obj["quiet"]
    basis = PositiveBasis(f.matrix, f.partition, f.meta, hps=hps)
    report = {"n": basis.n, "s": basis.s}

    if method != cosine.SAMPLED and force and not basis.is_positive_basis():
        logger.info("input is not a positive basis, sampling instead")
        method = cosine.SAMPLED
        report["forced"] = True
    if method == cosine.SAMPLED:
        if seed is None:
            raise click.UsageError("the sampled method needs an explicit --seed")
        samples = samples or hps.sampling.default_samples
        value = basis.cosine_measure(cosine.SAMPLED, quiet=quiet, samples=samples, seed=seed)
        report.update(
            method=cosine.SAMPLED,
            value=value,
            cosine_vectors=[],
            active_sets=[],
            argmin_bases=[],
            samples=samples,
            seed=seed,
        )
    else:
        result = basis.cosine_measure(method, quiet=quiet)
        report.update(result.to_dict())
    report["value_17g"] = "%.17g" % report["value"]
    click.echo(json.dumps(report, indent=2))


@cli.command()
@click.option("--input", "-i", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@format_option
@click.pass_context
@exit_on_error
def verify(ctx, input_path, fmt):
    """Positive spanning, independence and partition report for a basis file."""
    hps = ctx.obj["hps"]
    partition_status = "none"
    try:
        f = load(input_path, fmt)
        basis = PositiveBasis(f.matrix, f.partition, f.meta, hps=hps)
        if f.partition is not None:
            partition_status = "valid"
    except InvalidPartition as e:
        logger.info("ignoring partition: {}", e)
        partition_status = "invalid"
        f = load(input_path, fmt, with_partition=False)
        basis = PositiveBasis(f.matrix, None, f.meta, hps=hps)

    n, s = basis.n, basis.s
    check = spanning.is_positive_spanning(basis.matrix, require_unit=False)
    independent = spanning.is_positively_independent(
        basis.matrix, require_unit=False, threads=basis.threads
    )
    omega_plus = basis.omega_plus_partition()
    if omega_plus is None:
        omega_status = "absent"
    elif omega_plus is basis.partition:
        omega_status = "present"
    else:
        omega_status = "detected"

    report = {
        "n": n,
        "s": s,
        "unit_columns": basis.unit_columns(),
        "rank": matkernel.rank(basis.matrix),
        "positive_spanning": check.spans,
        "positively_independent": independent,
        "positive_basis": bool(check.spans and independent and n + 1 <= s <= 2 * n),
        "size_class": construct.size_class(n, s),
        "partition": partition_status,
        "omega_plus_partition": omega_status,
        "certificate": check.certificate.to_dict(),
    }
    click.echo(json.dumps(report, indent=2))


def render_table(max_n):
    """Block grid, a blank line, then the cm_formula grid for the same cells."""
    header = "\t".join(str(n) for n in range(2, max_n + 1))
    rows = construct.table_cells(max_n)
    blocks = ["s/n\t" + header]
    values = ["cm s/n\t" + header]
    for s, cells in rows:
        blocks.append(f"{s}\t" + "\t".join("-" if c is None else c["notation"] for c in cells))
        values.append(f"{s}\t" + "\t".join("-" if c is None else "%.17g" % c["cm"] for c in cells))
    return "\n".join(blocks) + "\n\n" + "\n".join(values)


@cli.command()
@click.option("--max-n", type=click.IntRange(min=2), default=None, help="Largest dimension (default from config)")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.pass_context
def table(ctx, max_n, fmt):
    """Block structure of the optimal bases over orthogonal minimal blocks."""
    max_n = max_n or ctx.obj["hps"].table.max_n
    if fmt == "text":
        click.echo(render_table(max_n))
        return
    cells = [c for _, row in construct.table_cells(max_n) for c in row if c is not None]
    click.echo(json.dumps(cells, indent=2))


@cli.command()
@click.option("--block", "block_paths", type=click.Path(exists=True, dir_okay=False), multiple=True, required=True, help="Minimal positive basis of a subspace (repeat, in order)")
@click.option("--critical", "criticals", type=str, multiple=True, callback=parse_vector, help="Critical vector for blocks 2, 3, ... (repeat)")
@click.option("--no-normalize", is_flag=True, help="Keep shifted columns unnormalized")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Output file (default: stdout)")
@format_option
@click.pass_context
@exit_on_error
def compose(ctx, block_paths, criticals, no_normalize, output, fmt):
    """Assemble a positive basis from minimal blocks and critical vectors."""
    mats = [load(path, None).matrix for path in block_paths]
    if criticals and len(criticals) != len(mats) - 1:
        raise InvalidBlock(
            f"{len(criticals)} critical vectors for {len(mats)} blocks, expected {len(mats) - 1}"
        )
    shifts = [None] + list(criticals or [None] * (len(mats) - 1))
    D, part = construct.compose_partition(list(zip(mats, shifts)), normalize=not no_normalize)
    meta = {"generator": "compose_partition", "blocks": str(len(mats))}
    if no_normalize:
        meta["conformant"] = "false"
        meta["note"] = "columns are not unit vectors"
    emit(basis_io.BasisFile(D, part, meta), output, fmt)


@cli.command()
@click.option("--input", "-i", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Output file (default: stdout)")
@format_option
@click.pass_context
@exit_on_error
def normalize(ctx, input_path, output, fmt):
    """Rescale every column to unit length."""
    f = load(input_path, None)
    try:
        matrix = matkernel.normalize_columns(f.matrix)
    except ValueError as e:
        raise BasisFileError(str(e))
    meta = dict(f.meta)
    meta.pop("conformant", None)
    meta.pop("note", None)
    meta["normalized"] = "true"
    emit(basis_io.BasisFile(matrix, f.partition, meta), output, fmt)


if __name__ == "__main__":
    cli()
