"""Successive linear relaxation for MINLPs with Lipschitz black-box constraints."""
