"""CSV ingestion, simulation and export"""
