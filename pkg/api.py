import numpy as np
from loguru import logger

import basis_io
import construct
import cosine
import matkernel
import spanning
import utils
from exceptions import InvalidPartition, NotOmegaPlus, NotPositiveBasis, NotUnit


class PositiveBasis:
    def __init__(self,
                matrix,
                partition=None,
                meta=None,
                threads=None,
                hps=None):
        self.matrix = matkernel.as_matrix(matrix)
        self.partition = partition
        self.meta = dict(meta or {})
        self.hps = hps or utils.get_hparams()
        self.threads = utils.resolve_threads(threads, self.hps)
        if partition is not None:
            construct.validate_partition(self.matrix, partition, require_zero_critical=False)
        self._is_basis = None
        self._cm = None

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def s(self):
        return self.matrix.shape[1]

    @property
    def size_class(self):
        return construct.size_class(self.n, self.s)

    @classmethod
    def optimal(cls, n, s, **kwargs):
        D, part = construct.optimal_intermediate(n, s)
        return cls(D, part, {"generator": "optimal_intermediate"}, **kwargs)

    @classmethod
    def maximal(cls, n, **kwargs):
        D, part = construct.maximal(n)
        return cls(D, part, {"generator": "maximal"}, **kwargs)

    @classmethod
    def from_file(cls, path, fmt=None, **kwargs):
        f = basis_io.read_basis_file(path, fmt)
        return cls(f.matrix, f.partition, f.meta, **kwargs)

    def to_file(self, path, fmt=None):
        basis_io.write_basis_file(basis_io.BasisFile(self.matrix, self.partition, self.meta), path, fmt)

    def unit_columns(self):
        norms = np.linalg.norm(self.matrix, axis=0)
        return bool(np.all(np.abs(norms - 1.0) <= matkernel.UNIT_TOL))

    def is_positive_basis(self):
        if self._is_basis is None:
            self._is_basis = spanning.is_positive_basis(
                self.matrix, require_unit=False, threads=self.threads
            )
        return self._is_basis

    def omega_plus_partition(self):
        """The stored partition if it is orthogonal with zero critical vectors,
        else one detected from the Gram matrix, else None."""
        if self.partition is not None and self.partition.zero_critical:
            try:
                construct.validate_partition(self.matrix, self.partition, require_orthogonal=True)
                return self.partition
            except ValueError as e:
                logger.debug("stored partition is not orthogonal: {}", e)
        try:
            return construct.detect_partition_orthogonal(self.matrix)
        except (NotOmegaPlus, NotUnit) as e:
            logger.debug("no orthogonal partition: {}", e)
            return None

    def cosine_measure(self, method=cosine.FULL, quiet=True, samples=None, seed=None):
        if method == cosine.SAMPLED:
            if seed is None:
                raise ValueError("sampling requires an explicit seed")
            samples = samples or self.hps.sampling.default_samples
            return cosine.cosine_measure_sampled(
                self.matrix, samples, seed, threads=self.threads, quiet=quiet
            )
        if self._cm is not None and self._cm.method == method:
            return self._cm
        if method == cosine.STRUCTURED:
            if self.partition is None:
                raise InvalidPartition("structured evaluation needs a partition")
            self._cm = cosine.cosine_measure_structured(
                self.matrix, self.partition, threads=self.threads, quiet=quiet
            )
        elif method == cosine.FULL:
            if not self.is_positive_basis():
                raise NotPositiveBasis("columns are not a positive basis")
            self._cm = cosine.cosine_measure_full(self.matrix, threads=self.threads, quiet=quiet)
        else:
            raise ValueError(f"unknown method {method!r}")
        return self._cm

    def realign(self, w):
        """New basis with the first column moved onto w; the partition and
        the cosine measure carry over."""
        T = construct.realign_transform(self.matrix, w)
        D = T @ self.matrix
        part = self.partition
        if part is not None and not part.zero_critical:
            part = construct.Partition.from_blocks(
                self.n, self.s,
                [(b.column_indices, b.m, T @ b.critical_vector) for b in part.blocks],
            )
        meta = dict(self.meta, realigned="true")
        return PositiveBasis(D, part, meta, threads=self.threads, hps=self.hps)

    def __repr__(self):
        return f"PositiveBasis(n={self.n}, s={self.s}, class={self.size_class})"
