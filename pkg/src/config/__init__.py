"""Configuration package initialization"""
