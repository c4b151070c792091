import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'divkit_project.settings')
django.setup()
