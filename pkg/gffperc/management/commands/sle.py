from django.core.management.base import CommandError

from ... import settings
from ...harness import wilson_interval
from ...limits import diffusion_start, half_plane_force_points, modulus_for_aspect, sle_hitting_batch
from ..base import GffpercCommand


class Command(GffpercCommand):
    help = "Hitting probability of +1 for the time-changed driving diffusion, against (1 + x0) / 2"

    def add_arguments(self, parser):
        parser.add_argument("--x0", type=float)
        parser.add_argument("--L", dest="L", type=float, help="start from the force points of R_L instead of --x0")
        parser.add_argument("--dt", type=float, default=1e-4)
        parser.add_argument("--samples", type=int, default=100_000)
        parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)

    def handle(self, *args, **options):
        x0, L = options["x0"], options["L"]
        if x0 is not None and L is not None:
            raise CommandError("give either --x0 or --L, not both")
        try:
            if L is not None:
                x0 = diffusion_start(*half_plane_force_points(modulus_for_aspect(L)))
            elif x0 is None:
                x0 = 0.0
            sample = sle_hitting_batch(x0, options["dt"], options["samples"], options["seed"])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

        low, high = wilson_interval(sample.plus, sample.n)
        self.stdout.write(f"x0 = {x0:.12g}, dt = {options['dt']:g}, n = {sample.n}")
        self.stdout.write(f"empirical P(+1) = {sample.plus / sample.n:.6f}  95% CI [{low:.6f}, {high:.6f}]")
        self.stdout.write(f"analytic  P(+1) = {(1 + x0) / 2:.6f}")
        if sample.unabsorbed:
            self.stderr.write(f"{sample.unabsorbed} paths not absorbed")
