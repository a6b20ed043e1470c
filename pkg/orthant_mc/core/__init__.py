"""Numerical core: signed design, propriety, samplers, moments and reference checks"""
