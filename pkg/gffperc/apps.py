from django.apps import AppConfig


class GffpercConfig(AppConfig):
    name = "gffperc"
    verbose_name = "GFF level-set percolation"
