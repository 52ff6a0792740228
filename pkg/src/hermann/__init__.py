"""Restricted root systems and orbit geometry of Hermann actions."""
