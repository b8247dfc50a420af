"""Batch file ingestion and report emission.

Obligation files are delimited text, one invoice per row:

    obligation_id,debtor,creditor,amount[,currency]

Amounts are base-10 integers in minor currency units; a currency column is
optional but must be uniform within a run. Liquidity files carry one row
per firm plus a directive line for the facility cap:

    # a_max=500
    firm,holdings,approved_overdraft,drawn_overdraft

All files are UTF-8. Reports are written with fixed ordering, LF line
endings and no timestamps, so identical inputs produce byte-identical
outputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from netoff.clearing import ClearingResult, allocate_setoffs
from netoff.liquidity import (
    ExtendedClearingResult,
    FeasibilityReport,
    LiquiditySources,
    build_extended_matrix,
    check_balanced_feasibility,
)
from netoff.model import (
    Firm,
    LiabilityMatrix,
    Obligation,
    ObligationNetwork,
    ValidationError,
    build_liability_matrix,
    lattice_split,
    net_positions,
    nid,
)

OBLIGATION_HEADER = ["obligation_id", "debtor", "creditor", "amount"]
LIQUIDITY_HEADER = ["firm", "holdings", "approved_overdraft", "drawn_overdraft"]
MAX_REPORTED_ERRORS = 20


class _RowErrors:
    def __init__(self, path):
        self.path = path
        self.messages: list[str] = []

    def add(self, line: int, message: str) -> None:
        if len(self.messages) < MAX_REPORTED_ERRORS:
            self.messages.append(f"{self.path}:{line}: {message}")
        elif len(self.messages) == MAX_REPORTED_ERRORS:
            self.messages.append("... further errors suppressed")

    def raise_if_any(self) -> None:
        if self.messages:
            raise ValidationError("\n".join(self.messages))


def _parse_amount(text: str, *, minimum: int = 1) -> int:
    text = text.strip()
    if not text or text.lstrip("-").isdigit() is False:
        raise ValueError(f"not a base-10 integer: {text!r}")
    value = int(text)
    if value < minimum:
        raise ValueError(f"must be >= {minimum}, got {value}")
    return value


def ingest_obligations(path) -> tuple[ObligationNetwork, str | None]:
    """Parse and validate an obligations file.

    Returns the network and the file's uniform currency code (or None).
    Raises ValidationError listing every offending row with its line number.
    """
    path = Path(path)
    errors = _RowErrors(path.name)
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path.name}:1: missing header row")
    header = [cell.strip() for cell in rows[0]]
    if header[:4] != OBLIGATION_HEADER or len(header) > 5:
        raise ValidationError(
            f"{path.name}:1: expected header {','.join(OBLIGATION_HEADER)}[,currency]"
        )

    firm_index: dict[str, int] = {}

    def firm_of(label: str) -> int:
        if label not in firm_index:
            firm_index[label] = len(firm_index)
        return firm_index[label]

    obligations: list[Obligation] = []
    seen_ids: set[str] = set()
    currency: str | None = None
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) not in (4, 5):
            errors.add(line, f"expected 4 or 5 fields, got {len(row)}")
            continue
        ob_id, debtor, creditor, amount_text = (cell.strip() for cell in row[:4])
        if not ob_id:
            errors.add(line, "empty obligation id")
            continue
        if ob_id in seen_ids:
            errors.add(line, f"duplicate obligation id {ob_id!r}")
            continue
        if not debtor or not creditor:
            errors.add(line, "empty firm label")
            continue
        if debtor == creditor:
            errors.add(line, f"self-loop: {debtor!r} owes itself")
            continue
        try:
            amount = _parse_amount(amount_text)
        except ValueError as exc:
            errors.add(line, f"bad amount: {exc}")
            continue
        if len(row) == 5 and row[4].strip():
            code = row[4].strip()
            if currency is None:
                currency = code
            elif code != currency:
                errors.add(line, f"currency {code!r} differs from {currency!r}")
                continue
        seen_ids.add(ob_id)
        obligations.append(Obligation(ob_id, firm_of(debtor), firm_of(creditor), amount))
    errors.raise_if_any()
    firms = [Firm(i, label) for label, i in sorted(firm_index.items(), key=lambda kv: kv[1])]
    return ObligationNetwork(firms, obligations), currency


def ingest_liquidity(path, network: ObligationNetwork) -> LiquiditySources:
    """Parse a liquidity file against a known network.

    Firms absent from the file get zero liquidity; firms unknown to the
    network are an error. The ``# a_max=`` directive is mandatory.
    """
    path = Path(path)
    errors = _RowErrors(path.name)
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            raw = handle.read().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc

    facility_cap: int | None = None
    body: list[tuple[int, str]] = []
    for line, text in enumerate(raw, start=1):
        stripped = text.strip()
        if stripped.startswith("#"):
            directive = stripped.lstrip("#").strip()
            if "=" in directive:
                key, _, value = directive.partition("=")
                if key.strip() == "a_max":
                    try:
                        facility_cap = _parse_amount(value, minimum=0)
                    except ValueError as exc:
                        errors.add(line, f"bad a_max: {exc}")
            continue
        if stripped:
            body.append((line, text))
    if facility_cap is None and not any(m for m in errors.messages):
        errors.add(1, "missing '# a_max=<amount>' directive")

    n = network.firm_count
    label_to_index = {firm.label: firm.index for firm in network.firms}
    holdings = np.zeros(n, dtype=np.int64)
    approved = np.zeros(n, dtype=np.int64)
    drawn = np.zeros(n, dtype=np.int64)

    if not body:
        errors.add(len(raw) or 1, "missing header row")
        errors.raise_if_any()
    header_line, header_text = body[0]
    header = [cell.strip() for cell in next(csv.reader([header_text]))]
    if header != LIQUIDITY_HEADER:
        errors.add(header_line, f"expected header {','.join(LIQUIDITY_HEADER)}")
        errors.raise_if_any()

    seen: set[str] = set()
    for line, text in body[1:]:
        row = next(csv.reader([text]))
        if len(row) != 4:
            errors.add(line, f"expected 4 fields, got {len(row)}")
            continue
        label = row[0].strip()
        if label not in label_to_index:
            errors.add(line, f"unknown firm {label!r}")
            continue
        if label in seen:
            errors.add(line, f"duplicate firm {label!r}")
            continue
        seen.add(label)
        try:
            values = [_parse_amount(cell, minimum=0) for cell in row[1:]]
        except ValueError as exc:
            errors.add(line, f"bad amount: {exc}")
            continue
        i = label_to_index[label]
        holdings[i], approved[i], drawn[i] = values
        if drawn[i] > approved[i]:
            errors.add(line, f"drawn overdraft {drawn[i]} exceeds approved {approved[i]}")
    errors.raise_if_any()
    return LiquiditySources(holdings, approved, drawn, facility_cap)


def _write_text(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return path


def _summary_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _residual_rows(network, discharged_by_id, currency):
    rows = []
    for ob in network.obligations:
        left = ob.amount - discharged_by_id.get(ob.id, 0)
        if left > 0:
            labels = network.labels()
            row = [ob.id, labels[ob.debtor], labels[ob.creditor], str(left)]
            if currency:
                row.append(currency)
            rows.append(row)
    return rows


def _csv_text(header: list[str], rows) -> str:
    import io as _io

    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_report(result: ClearingResult, network: ObligationNetwork, out_dir,
                *, graph: bool = False, currency: str | None = None) -> list[Path]:
    """Write the clearing outputs: summary, notices, residual file, optional graph.

    The residual obligations file uses the input schema, so feeding it back
    through ``ingest_obligations`` reproduces exactly the matrix left for
    conventional settlement.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = network.labels()
    b = net_positions(build_liability_matrix(network)) if network.firm_count else np.zeros(0, dtype=np.int64)

    written = []
    summary = {
        "firms": network.firm_count,
        "obligations": len(network.obligations),
        "currency": currency,
        "original_weight": result.original_weight,
        "cleared_weight": result.cleared_weight,
        "residual_weight": result.residual.matrix.total(),
        "nid": nid(b) if network.firm_count else 0,
        "cycles": len(result.cycles),
        "notices": len(result.notices),
        "gridlock_resolved": result.cleared_weight > 0,
    }
    written.append(_write_text(out / "summary.json", _summary_json(summary)))

    notice_rows = []
    for notice in result.notices:
        for side, items in (("debit", notice.debit_items), ("credit", notice.credit_items)):
            for item in items:
                counterparty = item.creditor if side == "debit" else item.debtor
                notice_rows.append([
                    labels[notice.firm],
                    side,
                    item.obligation_id,
                    labels[counterparty],
                    str(item.amount),
                    "full" if item.discharged_in_full else "partial",
                ])
    written.append(_write_text(
        out / "notices.csv",
        _csv_text(
            ["firm", "side", "obligation_id", "counterparty", "amount", "discharged"],
            notice_rows,
        ),
    ))

    discharged_by_id = {
        item.obligation_id: item.amount
        for notice in result.notices
        for item in notice.debit_items
    }
    header = list(OBLIGATION_HEADER) + (["currency"] if currency else [])
    written.append(_write_text(
        out / "residual_obligations.csv",
        _csv_text(header, _residual_rows(network, discharged_by_id, currency)),
    ))

    if graph:
        written.append(_write_text(
            out / "network.dot",
            render_graph(network, discharged_by_id),
        ))
    return written


def emit_extended_report(result: ExtendedClearingResult, report: FeasibilityReport,
                         network: ObligationNetwork, out_dir,
                         *, currency: str | None = None) -> list[Path]:
    """Write the liquidity-mode outputs: summary, set-offs, cash plan, residual."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = network.labels()
    matrix = build_liability_matrix(network)

    written = []
    summary = {
        "firms": network.firm_count,
        "obligations": len(network.obligations),
        "currency": currency,
        "original_weight": matrix.total(),
        "discharged_weight": result.discharged_weight,
        "residual_weight": matrix.total() - result.discharged_weight,
        "nid": nid(net_positions(matrix)),
        "feasible": report.feasible,
        "deadlock": not report.feasible,
        "facility_cap": report.facility_cap,
        "credit_line_total": report.credit_line_total,
        "facility_cap_exceeded": report.cap_exceeded,
        "shortfalls": [[labels[firm], amount] for firm, amount in report.shortfalls],
        "account_debits_total": int(result.account_debits.sum()),
        "account_credits_total": int(result.account_credits.sum()),
        "overdraft_draws_total": int(result.overdraft_draws.sum()),
        "repayments_total": int(result.repayments.sum()),
    }
    written.append(_write_text(out / "summary.json", _summary_json(summary)))

    setoffs = allocate_setoffs(matrix, result.discharged, network)
    rows = [
        [
            item.obligation_id,
            labels[item.debtor],
            labels[item.creditor],
            str(item.amount),
            "full" if item.discharged_in_full else "partial",
        ]
        for item in setoffs
    ]
    written.append(_write_text(
        out / "discharged_obligations.csv",
        _csv_text(["obligation_id", "debtor", "creditor", "amount", "discharged"], rows),
    ))

    cash_rows = []
    for i in range(network.firm_count):
        debit = int(result.account_debits[i])
        credit = int(result.account_credits[i])
        draw = int(result.overdraft_draws[i])
        repay = int(result.repayments[i])
        if debit or credit or draw or repay:
            cash_rows.append([labels[i], str(debit), str(credit), str(draw), str(repay)])
    written.append(_write_text(
        out / "settlement.csv",
        _csv_text(
            ["firm", "account_debit", "account_credit", "overdraft_draw", "overdraft_repayment"],
            cash_rows,
        ),
    ))

    discharged_by_id = {item.obligation_id: item.amount for item in setoffs}
    header = list(OBLIGATION_HEADER) + (["currency"] if currency else [])
    written.append(_write_text(
        out / "residual_obligations.csv",
        _csv_text(header, _residual_rows(network, discharged_by_id, currency)),
    ))
    return written


def render_graph(network: ObligationNetwork, discharged_by_id: dict[str, int]) -> str:
    """DOT text with firms as nodes; cleared obligations drawn solid, the
    rest dashed, partial discharges annotated."""

    def q(label: str) -> str:
        return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'

    labels = network.labels()
    lines = ["digraph obligations {", "  rankdir=LR;"]
    for label in labels:
        lines.append(f"  {q(label)};")
    for ob in network.obligations:
        done = discharged_by_id.get(ob.id, 0)
        text = f"{ob.id}: {done}/{ob.amount}"
        attrs = [f"label={q(text)}"]
        if done == ob.amount:
            attrs.append("style=bold")
        elif done == 0:
            attrs.append("style=dashed")
            attrs.append("color=gray50")
        lines.append(
            f"  {q(labels[ob.debtor])} -> {q(labels[ob.creditor])} [{', '.join(attrs)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def analyze_text(network: ObligationNetwork, currency: str | None = None) -> str:
    """Human-readable diagnostics: positions, cash need, balance verdict."""
    lines = [
        f"firms: {network.firm_count}",
        f"obligations: {len(network.obligations)}",
        f"total weight: {network.total_weight()}"
        + (f" {currency}" if currency else ""),
    ]
    if network.firm_count == 0:
        lines.append("empty network")
        return "\n".join(lines) + "\n"
    matrix = build_liability_matrix(network)
    b = net_positions(matrix)
    plus, minus = lattice_split(b)
    lines += [
        f"net internal debt (cash needed to clear everything): {nid(b)}",
        f"total surplus positions: {int(plus.sum())}",
        f"balanced without external cash: {'yes' if nid(b) == 0 else 'no'}",
        "",
        "firm positions (debt, credit, net):",
    ]
    debt = matrix.row_sums()
    credit = matrix.col_sums()
    for firm in network.firms:
        lines.append(
            f"  {firm.label}: {int(debt[firm.index])} {int(credit[firm.index])} "
            f"{int(b[firm.index]):+d}"
        )
    return "\n".join(lines) + "\n"
