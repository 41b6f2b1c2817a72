"""Domain models package initialization"""
