"""Packaged scenario configs (fig2..fig5), resolvable by bare name."""
