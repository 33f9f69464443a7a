import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'vacoal_reasoner.settings')
django.setup()
