from ... import settings
from ...exceptions import InvariantViolation
from ...selftest import CHECKS, run_selftest
from ..base import GffpercCommand


class Command(GffpercCommand):
    help = "Compare the fast code paths against the reference oracles"

    def add_arguments(self, parser):
        names = [check.__name__.removeprefix("check_") for check in CHECKS]
        parser.add_argument("--full", action="store_true", help="acceptance-size runs")
        parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
        parser.add_argument("--only", nargs="+", choices=names, metavar="CHECK")

    def handle(self, *args, **options):
        results = run_selftest(full=options["full"], seed=options["seed"], only=options["only"])
        for result in results:
            self.stdout.write(str(result))
        failed = [r.name for r in results if not r.passed]
        if failed:
            raise InvariantViolation(f"{len(failed)} check(s) failed: {', '.join(failed)}")
