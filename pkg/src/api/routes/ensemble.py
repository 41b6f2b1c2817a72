"""Ensemble sampling and export endpoints"""
import io
import json
import logging
import os
import tempfile

from flask import Blueprint, Response, jsonify, send_file

from middleware.request_handling import map_sampler_errors, require_json_body
from models.ensemble import RunConfig
from services.ensemble_service import balance_profile, sample_ensemble
from services.export_service import ExportService
from utils.validators import validate_run_config

logger = logging.getLogger(__name__)

ensemble_bp = Blueprint('ensemble', __name__)
export_service = ExportService()

# Requests above this many records are refused; large runs belong to the CLI
MAX_HTTP_SAMPLES = 10000


def _run_config(data) -> RunConfig:
    if 'edge_list' in data['graph']:
        raise ValueError("Edge-list files are not accepted over HTTP; use a generator")
    return RunConfig.from_dict(data)


def _too_large(config: RunConfig):
    total = config.samples * config.chains
    if total > MAX_HTTP_SAMPLES:
        return jsonify({
            'error': 'Request too large',
            'message': f'{total} records requested; the limit is {MAX_HTTP_SAMPLES}',
            'max_samples': MAX_HTTP_SAMPLES,
        }), 413
    return None


@ensemble_bp.route('/sample', methods=['POST'])
@require_json_body(validate_run_config)
@map_sampler_errors
def sample(data):
    """
    Draw an ensemble and return it as JSON lines

    Request body: a run configuration
    {
        "graph": {"generator": "grid", "params": [4, 4]},
        "chain": {"variant": "FOREST_WALK", "k": 2, "c": 1, "seed": 7},
        "ensemble": {"burn_in": 100, "samples": 50}
    }

    Returns:
    application/x-ndjson, one record per line
    """
    try:
        config = _run_config(data)
    except ValueError as e:
        return jsonify({'error': 'Invalid request', 'message': str(e)}), 400
    rejected = _too_large(config)
    if rejected:
        return rejected

    # Drawn eagerly so chain failures still map to an error status
    records = list(sample_ensemble(config))
    logger.info(f"Returning {len(records)} records for {config.chain!r}")
    body = ''.join(json.dumps(r.to_dict(), separators=(',', ':')) + '\n' for r in records)
    return Response(body, status=200, mimetype='application/x-ndjson')


@ensemble_bp.route('/export', methods=['POST'])
@require_json_body(validate_run_config)
@map_sampler_errors
def export(data):
    """
    Draw an ensemble and return its statistics as an XLSX workbook

    Sheets: per-sample statistics and the balance profile.
    """
    try:
        config = _run_config(data)
    except ValueError as e:
        return jsonify({'error': 'Invalid request', 'message': str(e)}), 400
    rejected = _too_large(config)
    if rejected:
        return rejected

    records = list(sample_ensemble(config))
    profile = balance_profile(records)
    with tempfile.TemporaryDirectory(prefix='ensemble_export_') as workdir:
        file_path, error = export_service.generate_xlsx(
            {'Samples': export_service.records_table(records), 'Balance': profile.to_table()},
            os.path.join(workdir, f'{config.run_name}.xlsx'),
        )
        if error:
            return jsonify({'error': 'Export failed', 'message': error}), 500
        with open(file_path, 'rb') as handle:
            workbook = io.BytesIO(handle.read())

    return send_file(
        workbook,
        mimetype='application/vnd.openxmlformats-officedocument.spreadsheetml.sheet',
        as_attachment=True,
        download_name=f'{config.run_name}.xlsx'
    )
