"""Concrete NV-centre parameterisations."""
