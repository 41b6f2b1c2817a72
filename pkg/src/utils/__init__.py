"""Utilities package initialization"""
