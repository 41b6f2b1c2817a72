"""Middleware package initialization"""
