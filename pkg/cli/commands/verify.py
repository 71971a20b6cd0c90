"""Run every invariant suite."""
from lib.cli.context import Context
from lib.cli.csv_output import write_csv
from lib.cli.suites import run_suites
from lib.core.text_processor import format_number

NAME = "verify"
HELP = "run the invariant suites; exit 1 if any fails"
SUMMARY_HEADER = ["suite", "passed", "checks", "max_residual"]


def run(context: Context) -> int:
    """Run the suites, print the summary and write it as CSV with --out.

    Args:
        context: Run context

    Returns:
        0 when every suite passes, 1 otherwise
    """
    results = run_suites(context.config)
    width = max(len(result.name) for result in results)
    for result in results:
        status = "ok" if result.passed else "FAILED"
        print(
            f"{result.name:<{width}}  {status:<6}  {result.checks:>5}  "
            f"{format_number(result.max_residual)}",
        )
        for label in result.failures:
            print(f"{'':<{width}}  failed: {label}")
    if context.out is not None:
        write_csv(
            context.out,
            SUMMARY_HEADER,
            [
                [r.name, str(r.passed).lower(), str(r.checks), r.max_residual]
                for r in results
            ],
        )
    failed = [result.name for result in results if not result.passed]
    if failed:
        context.logger.error("Invariant suites failed", suites=failed)
        return 1
    context.logger.info("All invariant suites passed", suites=len(results))
    return 0
