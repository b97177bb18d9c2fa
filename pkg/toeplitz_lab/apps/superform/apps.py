from django.apps import AppConfig


class SuperformConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "toeplitz_lab.apps.superform"
