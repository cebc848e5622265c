from django.core.management.base import CommandError

from ...limits import crossing_limit, half_plane_force_points, modulus_for_aspect
from ..base import GffpercCommand


class Command(GffpercCommand):
    help = "Print the conformal crossing limit of R_L with its elliptic modulus and corner images"

    def add_arguments(self, parser):
        parser.add_argument("--L", dest="L", type=float, default=1.0)

    def handle(self, *args, **options):
        L = options["L"]
        try:
            images = modulus_for_aspect(L)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        yL, yR = half_plane_force_points(images)
        self.stdout.write(f"{crossing_limit(L):.12f}")
        self.stdout.write(f"k = {images.k:.12g}")
        self.stdout.write(f"k' = {images.k_prime:.12g}")
        self.stdout.write(
            f"corners: a = {images.ya:.12g}, b = {images.yb:.12g}, c = {images.yc:.12g}, d = {images.yd:.12g}"
        )
        self.stdout.write(f"half-plane force points: yL = {yL:.12g}, yR = {yR:.12g}")
