from django.apps import AppConfig


class TextprocConfig(AppConfig):
    name = "textproc"
