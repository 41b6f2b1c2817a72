"""Export service for ensemble records and statistics tables"""
import csv
import gc
import json
import logging
import os
import threading
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import openpyxl
from openpyxl.cell import WriteOnlyCell
from openpyxl.styles import Font, PatternFill

from models.ensemble import EnsembleRecord

logger = logging.getLogger(__name__)

Table = Tuple[Sequence[str], Iterable[Sequence]]


class JsonlWriter:
    """Appends ensemble records to a JSONL file, one object per line in fixed key order"""

    def __init__(self, path: str):
        self.path = path
        self.count = 0
        self.lock = threading.Lock()
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self._handle = open(path, 'w', encoding='utf-8', newline='\n')

    def write_batch(self, records: List[EnsembleRecord]) -> None:
        with self.lock:
            for record in records:
                self._handle.write(json.dumps(record.to_dict(), separators=(',', ':')) + '\n')
            self.count += len(records)

    def close(self) -> None:
        with self.lock:
            if not self._handle.closed:
                self._handle.close()
                logger.info(f"Wrote {self.count} records to {self.path}")

    def __enter__(self) -> 'JsonlWriter':
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_jsonl(path: str) -> List[EnsembleRecord]:
    """Load records written by JsonlWriter"""
    with open(path, 'r', encoding='utf-8') as handle:
        return [EnsembleRecord.from_dict(json.loads(line)) for line in handle if line.strip()]


class ExportService:
    """Writes statistics tables as CSV and XLSX"""

    HEADER_FILL = "CCCCCC"

    def write_csv(self, table: Table, file_path: str) -> Tuple[Optional[str], Optional[str]]:
        """
        Write one table as CSV

        Args:
            table: Tuple of (headers, rows)
            file_path: Destination

        Returns:
            Tuple of (file_path: str, error: str)
        """
        try:
            headers, rows = table
            directory = os.path.dirname(file_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(file_path, 'w', encoding='utf-8', newline='') as handle:
                writer = csv.writer(handle, lineterminator='\n')
                writer.writerow(headers)
                for row in rows:
                    writer.writerow(row)
            logger.info(f"Saved table to {file_path}")
            return file_path, None
        except OSError as e:
            logger.error(f"Failed to write {file_path}", exc_info=True)
            return None, f"Failed to write CSV: {str(e)}"

    def generate_xlsx(self, tables: Dict[str, Table], file_path: str) -> Tuple[Optional[str], Optional[str]]:
        """
        Write several tables into one workbook using write-only mode

        Args:
            tables: Sheet name -> (headers, rows)
            file_path: Destination

        Returns:
            Tuple of (file_path: str, error: str)
        """
        if not tables:
            return None, "No tables to export"
        try:
            logger.info(f"Starting XLSX generation with {len(tables)} sheet(s)")
            wb = openpyxl.Workbook(write_only=True)

            for name, (headers, rows) in tables.items():
                ws = wb.create_sheet(title=self._sanitize_sheet_name(name))
                header_cells = []
                for header_text in headers:
                    cell = WriteOnlyCell(ws, value=header_text)
                    cell.font = Font(bold=True)
                    cell.fill = PatternFill(start_color=self.HEADER_FILL, end_color=self.HEADER_FILL, fill_type="solid")
                    header_cells.append(cell)
                ws.append(header_cells)
                for row in rows:
                    ws.append([self._cell_value(v) for v in row])
                logger.info(f"Completed sheet {name}")

            directory = os.path.dirname(file_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            logger.info(f"Saving XLSX to {file_path}")
            wb.save(file_path)

            del wb
            gc.collect()

            logger.info("XLSX generation complete")
            return file_path, None

        except Exception as e:
            logger.error("XLSX generation failed", exc_info=True)
            return None, f"Failed to generate XLSX: {str(e)}"

    @staticmethod
    def records_table(records: Iterable[EnsembleRecord]) -> Table:
        """Per-sample statistics (without assignments) as a table"""
        headers = ['Sample', 'Chain', 'Step', 'Sizes', 'Imbalance Ratio', 'Log Weight', 'Phi', 'Avg Gap']
        rows = [
            [r.sample_index, r.chain, r.step, ' '.join(map(str, r.sizes)), r.imbalance_ratio(),
             r.log_weight, '' if r.phi is None else r.phi, r.avg_gap or '']
            for r in records
        ]
        return headers, rows

    @staticmethod
    def _cell_value(value):
        if isinstance(value, (int, float, str)) or value is None:
            return value
        return str(value)

    def _sanitize_sheet_name(self, name: str) -> str:
        """
        Sanitize sheet name to comply with Excel requirements
        Max 31 characters, no special characters
        """
        invalid_chars = ['\\', '/', '*', '[', ']', ':', '?']
        for char in invalid_chars:
            name = name.replace(char, '_')
        return name[:31]
