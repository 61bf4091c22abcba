from ...etch import ETCH_COLUMNS, EtchSeries
from ...exceptions import ValidationError
from ._read_table import LINE_COLUMN, _read_table


def _load_etch_series(path) -> EtchSeries:
    """
    Load per-device etch-cycle records.

    Parameters
    ----------
    path : str or os.PathLike
        CSV with columns ``device_id,design,cycle,Ec_RT_eV,Ec_LT_eV,Q,flag``.
        Energies and Q may be empty; ``flag`` is free text marking an
        unreliable LT value.

    Returns
    -------
    EtchSeries

    Raises
    ------
    ParseError
        If a row is malformed or a required column is missing.
    ValidationError
        If cycles are not non-negative integers increasing per device, a
        design label is unknown or a record has no mode energy.

    Examples
    --------
    >>> series = _load_etch_series("etch_series.csv")
    >>> print(series)
    Etch series : 6 devices, 42 records, cycles 0-6
    """
    _, df = _read_table(
        path,
        ETCH_COLUMNS,
        "etch series",
        optional=("Ec_RT_eV", "Ec_LT_eV", "Q", "flag"),
        text_columns=("device_id", "design", "flag"),
    )
    try:
        return EtchSeries(df.drop(columns=[LINE_COLUMN]))
    except ValidationError as e:
        raise ValidationError(f"{path}: {e}") from e
