import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'toeplitz_lab.settings')
django.setup()
