"""Rank-one preservers on tensor products: tensor algebra, preserver forms, verification and recovery."""
