"""Pydantic models for data validation"""
