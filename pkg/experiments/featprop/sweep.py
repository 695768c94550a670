import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List

from smart_open import open

from featprop.plugins.config import register_plugin
from featprop.plugins.reporters import CsvReporter, SummaryRow
from featprop.runner.experiment_runner import ExperimentRunner


@register_plugin
class MarkdownReporter(CsvReporter):
    """
    The csv reports, plus a markdown table of Macro-F1 per strategy and sweep section
    """

    @staticmethod
    def report_globally(aggregate_reports: Dict[str, List[SummaryRow]], report_dir: Path) -> Path:

        CsvReporter.report_globally(aggregate_reports, report_dir)
        path = Path(str(report_dir)) / 'summary.md'
        with open(str(path), 'w') as reporting:
            reporting.write("| section | strategy | Macro-F1 |\n|---|---|---|\n")
            for section, rows in aggregate_reports.items():
                for row in rows:
                    if row.metric == 'macro_f1':
                        reporting.write(f"| {section} | {row.strategy} | {100 * row.mean:.2f} +- {100 * row.stddev:.2f} |\n")
        return path


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    parent_dir = Path(__file__).parent
    home_env = Path.home() / 'work/featprop-data'
    date = '_'.join(str(datetime.today()).split(' '))

    ExperimentRunner.run_all(experiment=parent_dir / 'cora.toml',
                             experiment_config=parent_dir / 'gcn_vs_sgc.cfg',
                             report_dir=f"{home_env}/gcn_vs_sgc/{date}",
                             reporter=MarkdownReporter())

    # # Uncomment to run the distance ablations
    # ExperimentRunner.run_all(experiment=parent_dir / 'cora.toml',
    #                          experiment_config=parent_dir / 'ablations.toml',
    #                          report_dir=f"{home_env}/ablations/{date}",
    #                          reporter=MarkdownReporter())
