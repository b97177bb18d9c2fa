from django.apps import AppConfig


class ToeplitzConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "toeplitz_lab.apps.toeplitz"
